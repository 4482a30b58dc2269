#ifndef FEWSHOT_MODEL_IO_H_
#define FEWSHOT_MODEL_IO_H_

#include <array>
#include <iosfwd>
#include <string>

#include "fewshot/pipeline.h"

namespace fewshot {

// Container layout:
//   "SFCM" | u32 LE version | u32 LE header length | JSON header (UTF-8) |
//   float32 LE arrays in the order listed by header["arrays"]
inline constexpr std::array<char, 4> kModelMagic = {'S', 'F', 'C', 'M'};

struct SerializeOptions {
  // Wall-clock durations differ between otherwise identical runs; they are
  // only written when asked for so that containers stay byte-reproducible.
  bool include_timings = false;
};

void serialize_model(const ModelArtifact& artifact, std::ostream& out,
                     const SerializeOptions& options = {});
std::string serialize_model_to_string(const ModelArtifact& artifact,
                                      const SerializeOptions& options = {});
void save_model_file(const std::string& path, const ModelArtifact& artifact,
                     const SerializeOptions& options = {});

// Throws BadMagicError, UnsupportedVersionError, TruncatedError or
// ArraySizeError (naming the array).
ModelArtifact deserialize_model(std::istream& in);
ModelArtifact deserialize_model_from_string(const std::string& bytes);
ModelArtifact load_model_file(const std::string& path);

}  // namespace fewshot

#endif  // FEWSHOT_MODEL_IO_H_
