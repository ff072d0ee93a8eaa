#pragma once

#include <cstdint>
#include <vector>

namespace hyfi::synth {

/// One stimulus: its semantic and perceptual visual features and the paired
/// brain recording.
struct PairedItem {
  std::vector<double> semantic;
  std::vector<double> perceptual;
  std::vector<double> brain;
  std::uint32_t concept_id = 0;

  bool operator==(const PairedItem&) const = default;
};

struct PairedDataset {
  std::size_t d_semantic = 0;
  std::size_t d_perceptual = 0;
  std::size_t d_brain = 0;
  std::vector<PairedItem> items;

  std::size_t size() const { return items.size(); }
  bool empty() const { return items.empty(); }
  bool operator==(const PairedDataset&) const = default;
};

}  // namespace hyfi::synth
