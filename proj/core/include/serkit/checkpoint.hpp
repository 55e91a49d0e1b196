#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "serkit/tensor.hpp"

namespace serkit {

// Model checkpoint container: a text header (kind, metadata, and a
// name,offset,length index) followed by a binary payload of SERT tensors.
struct Checkpoint {
  std::string kind;
  std::map<std::string, std::string> meta;
  std::vector<std::pair<std::string, FeatureTensor>> tensors;  // insertion order

  const FeatureTensor* find(const std::string& name) const;
  void add(const std::string& name, FeatureTensor t);
};

void save_checkpoint(const std::filesystem::path& p, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& p);

}  // namespace serkit
