#pragma once

#include <stdexcept>
#include <string>

namespace vcube {

// Base class for all recoverable pipeline errors. Each concrete type carries a
// stable machine-readable kind string used by the CLI's error JSON.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}
    const std::string& kind() const { return kind_; }

private:
    std::string kind_;
};

#define VCUBE_DEFINE_ERROR(NAME)                                       \
    class NAME : public Error {                                        \
    public:                                                            \
        explicit NAME(const std::string& what) : Error(#NAME, what) {} \
    }

VCUBE_DEFINE_ERROR(BehindCamera);
VCUBE_DEFINE_ERROR(DegenerateFrustum);
VCUBE_DEFINE_ERROR(UnknownCube);
VCUBE_DEFINE_ERROR(InvalidLayout);
VCUBE_DEFINE_ERROR(DimensionMismatch);
VCUBE_DEFINE_ERROR(EmptyDepth);
VCUBE_DEFINE_ERROR(TooFewViews);
VCUBE_DEFINE_ERROR(MarkerNotVisible);
VCUBE_DEFINE_ERROR(EmptyMask);
VCUBE_DEFINE_ERROR(MissingPortrait);
VCUBE_DEFINE_ERROR(InsufficientData);
VCUBE_DEFINE_ERROR(BadConfig);
VCUBE_DEFINE_ERROR(IoError);

#undef VCUBE_DEFINE_ERROR

}  // namespace vcube
