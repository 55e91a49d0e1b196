#pragma once

#include <stdexcept>
#include <string>

namespace serkit {

// Every failure the library reports derives from Error and carries a stable
// kind name. The CLI prints the kind on stderr and exits nonzero.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define SERKIT_DEFINE_ERROR(NAME)                       \
  struct NAME final : Error {                           \
    explicit NAME(const std::string& what)              \
        : Error(#NAME, what) {}                         \
  }

// audio_io
SERKIT_DEFINE_ERROR(MalformedContainer);
SERKIT_DEFINE_ERROR(UnsupportedEncoding);
SERKIT_DEFINE_ERROR(EmptyAudio);

// dsp
SERKIT_DEFINE_ERROR(DegenerateFilter);
SERKIT_DEFINE_ERROR(ClipTooShort);

// dataset
SERKIT_DEFINE_ERROR(BadFilename);
SERKIT_DEFINE_ERROR(UnknownEmotionCode);
SERKIT_DEFINE_ERROR(EmptyManifest);

// augment / nn
SERKIT_DEFINE_ERROR(ShapeMismatch);
SERKIT_DEFINE_ERROR(DegenerateBatch);
SERKIT_DEFINE_ERROR(InvalidTarget);

// models
SERKIT_DEFINE_ERROR(SingleClass);
SERKIT_DEFINE_ERROR(NonFiniteFeature);
SERKIT_DEFINE_ERROR(MissingTensor);
SERKIT_DEFINE_ERROR(DimMismatch);

// train / eval
SERKIT_DEFINE_ERROR(NonFiniteGradient);
SERKIT_DEFINE_ERROR(NonFiniteLoss);
SERKIT_DEFINE_ERROR(EmptySplit);
SERKIT_DEFINE_ERROR(EmptyMatrix);

// generic
SERKIT_DEFINE_ERROR(IoError);

#undef SERKIT_DEFINE_ERROR

}  // namespace serkit
