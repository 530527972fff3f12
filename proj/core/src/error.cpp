#include "hateclf/error.hpp"

namespace hateclf {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config: return "config error";
    case ErrorKind::Schema: return "schema error";
    case ErrorKind::Validation: return "validation error";
    case ErrorKind::EmptyData: return "empty dataset";
    case ErrorKind::Format: return "format error";
    case ErrorKind::Input: return "input error";
    case ErrorKind::Training: return "training error";
    case ErrorKind::Io: return "I/O error";
    case ErrorKind::Load: return "load error";
  }
  return "error";
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config:
      return exit_code::kConfig;
    case ErrorKind::Schema:
    case ErrorKind::Validation:
    case ErrorKind::EmptyData:
    case ErrorKind::Format:
      return exit_code::kData;
    case ErrorKind::Input:
    case ErrorKind::Training:
      return exit_code::kTraining;
    case ErrorKind::Io:
    case ErrorKind::Load:
      return exit_code::kIo;
  }
  return exit_code::kUnknown;
}

}  // namespace hateclf
