#include "pegscope/error.hpp"

namespace pegscope {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::domain: return "domain";
        case ErrorKind::parse: return "parse";
        case ErrorKind::integrity: return "integrity";
        case ErrorKind::not_found: return "not_found";
        case ErrorKind::extraction: return "extraction";
        case ErrorKind::config: return "config";
        case ErrorKind::transport: return "transport";
        case ErrorKind::context: return "context";
        case ErrorKind::analysis: return "analysis";
        case ErrorKind::io: return "io";
    }
    return "unknown";
}

}  // namespace pegscope
