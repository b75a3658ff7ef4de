// Error types shared across the library. Each error carries a short
// machine-parsable class name that the CLI prints on failure.
#pragma once

#include <stdexcept>
#include <string>

namespace epf {

enum class ErrorClass {
  config,   // bad or missing configuration
  io,       // file system / parse failures
  schema,   // CSV schema violations
  data,     // semantic data problems (non-monotone time, insufficient history, ...)
  numeric,  // non-finite values, quadrature failure, degenerate samples
  train,    // training divergence
};

inline const char* to_string(ErrorClass c) {
  switch (c) {
    case ErrorClass::config: return "config";
    case ErrorClass::io: return "io";
    case ErrorClass::schema: return "schema";
    case ErrorClass::data: return "data";
    case ErrorClass::numeric: return "numeric";
    case ErrorClass::train: return "train";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, const std::string& msg)
      : std::runtime_error(msg), cls_(cls) {}
  ErrorClass error_class() const { return cls_; }

 private:
  ErrorClass cls_;
};

[[noreturn]] inline void fail(ErrorClass cls, const std::string& msg) {
  throw Error(cls, msg);
}

}  // namespace epf
