#ifndef GIBBSDIM_ERRORS_HPP
#define GIBBSDIM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace gibbsdim {

enum class ErrorCode {
  InvalidArgument,
  ParseError,
  UnsupportedTailQuery,
  ExactDigitRequired,
  InvalidRange,
  EstimationFailed,
  NoK0Found,
  IoError,
  Internal,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace gibbsdim

#endif
