#pragma once

#include "advd/data.hpp"
#include "advd/nn.hpp"

namespace advd {

/// Procedurally generated stand-in datasets with the same shapes, value
/// ranges and on-disk formats as the real ones: stroke-rendered digits
/// (28x28), filled clothing silhouettes (28x28), and colored texture
/// patterns (3x32x32). Distortion and noise levels are tuned so a CNN lands
/// in the same accuracy regime as on the real data.
LabeledDataset synth_dataset(DatasetId id, std::size_t n, std::uint64_t seed,
                             const std::string& split);

}  // namespace advd
