#pragma once

#include <stdexcept>
#include <string>

namespace elaprobe {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define ELAPROBE_DEFINE_ERROR(Name)                         \
    class Name : public Error {                             \
    public:                                                 \
        explicit Name(const std::string& what)              \
            : Error(std::string(#Name ": ") + what) {}      \
    }

ELAPROBE_DEFINE_ERROR(InvalidSize);
ELAPROBE_DEFINE_ERROR(UnsupportedDimension);
ELAPROBE_DEFINE_ERROR(DimensionMismatch);
ELAPROBE_DEFINE_ERROR(InvalidDimension);
ELAPROBE_DEFINE_ERROR(NonFiniteInput);
ELAPROBE_DEFINE_ERROR(InvalidArgument);
ELAPROBE_DEFINE_ERROR(SchemaMismatch);
ELAPROBE_DEFINE_ERROR(LabelMismatch);
ELAPROBE_DEFINE_ERROR(InsufficientReps);
ELAPROBE_DEFINE_ERROR(TooFewSamples);
ELAPROBE_DEFINE_ERROR(MissingStrategy);
ELAPROBE_DEFINE_ERROR(MissingDataset);
ELAPROBE_DEFINE_ERROR(IoError);

#undef ELAPROBE_DEFINE_ERROR

}  // namespace elaprobe
