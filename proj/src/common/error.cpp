#include "common/error.hpp"

namespace thg {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::Parse: return "parse";
    case ErrorCode::Validation: return "validation";
    case ErrorCode::Io: return "io";
    case ErrorCode::Transport: return "transport";
    case ErrorCode::FixtureMissing: return "fixture-missing";
    case ErrorCode::FixtureCorrupt: return "fixture-corrupt";
    case ErrorCode::ArticleMissing: return "article-missing";
    case ErrorCode::UndefinedValue: return "undefined-value";
    case ErrorCode::Protocol: return "protocol";
    case ErrorCode::Generation: return "generation";
    case ErrorCode::Classification: return "classification";
    case ErrorCode::Judgement: return "judgement";
    case ErrorCode::NotFound: return "not-found";
    case ErrorCode::Internal: return "internal";
  }
  return "unknown";
}

}  // namespace thg
