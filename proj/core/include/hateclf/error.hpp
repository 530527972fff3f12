#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hateclf {

enum class ErrorKind {
  Config,      // invalid experiment or model configuration
  Schema,      // missing column, wrong label scheme
  Validation,  // bad label, bad text, duplicate id
  EmptyData,
  Format,      // malformed vector / parameter / checkpoint file
  Input,       // forward-pass shape or kind mismatch
  Training,    // non-finite loss and similar
  Io,
  Load,        // checkpoint resolution / tokenizer mismatch
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Process exit codes used by the command-line runner.
namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kUnknown = 1;
inline constexpr int kConfig = 2;
inline constexpr int kData = 3;
inline constexpr int kTraining = 4;
inline constexpr int kIo = 5;
}  // namespace exit_code

int exit_code_for(ErrorKind kind);

}  // namespace hateclf
