#pragma once

#include <stdexcept>
#include <string>

namespace sae {

/// Base of every error raised by the library. The message is a single line
/// naming the offending file, record or position.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define SAE_DECLARE_ERROR(Name)                  \
    class Name : public Error {                  \
    public:                                      \
        using Error::Error;                      \
    }

SAE_DECLARE_ERROR(IoError);
SAE_DECLARE_ERROR(MalformedCode);
SAE_DECLARE_ERROR(TaxonomyGap);
SAE_DECLARE_ERROR(MalformedTaxonomy);
SAE_DECLARE_ERROR(MalformedManifest);
SAE_DECLARE_ERROR(DecodeError);
SAE_DECLARE_ERROR(DegenerateImage);
SAE_DECLARE_ERROR(InvalidDimensions);
SAE_DECLARE_ERROR(DimensionMismatch);
SAE_DECLARE_ERROR(InvalidConfig);
SAE_DECLARE_ERROR(InvalidArchitecture);
SAE_DECLARE_ERROR(CorruptModel);
SAE_DECLARE_ERROR(CorruptIndex);
SAE_DECLARE_ERROR(DuplicateId);
SAE_DECLARE_ERROR(EmptyIndex);

#undef SAE_DECLARE_ERROR

} // namespace sae
