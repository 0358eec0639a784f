#pragma once

#include <stdexcept>
#include <string>

namespace mvx {

// Base of every error raised by the library. The CLI maps ConfigError and
// FormatError to usage exit code 2, everything else to 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define MVX_DEFINE_ERROR(Name)                                   \
    class Name : public Error {                                  \
    public:                                                      \
        explicit Name(const std::string& what) : Error(what) {}  \
    }

MVX_DEFINE_ERROR(DomainError);
MVX_DEFINE_ERROR(ShapeError);
MVX_DEFINE_ERROR(ConfigError);
MVX_DEFINE_ERROR(FormatError);
MVX_DEFINE_ERROR(ProjectionError);
MVX_DEFINE_ERROR(DegenerateError);
MVX_DEFINE_ERROR(InsufficientViewsError);
MVX_DEFINE_ERROR(InconsistentAnnotationError);
MVX_DEFINE_ERROR(GenerationError);

#undef MVX_DEFINE_ERROR

}  // namespace mvx
