#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "ndc/data/sample.hpp"

namespace ndc::data {

/// Ordered key=value text, one pair per line; '#' starts a comment.
using Manifest = std::map<std::string, std::string>;

void write_manifest(const std::filesystem::path& path, const Manifest& m);
/// ParseError on a line without '='.
Manifest read_manifest(const std::filesystem::path& path);

/// Directory bundle: manifest.txt, input.ndcg or points.ply, gt_signs.ndcg,
/// gt_flags.ndcg, gt_offsets.ndcg and mask_*.ndcg. `extra` entries are added
/// to the manifest. Loading reproduces the sample exactly.
void save_sample(const std::filesystem::path& dir, const TrainingSample& sample, const Manifest& extra = {});
TrainingSample load_sample(const std::filesystem::path& dir, Manifest* manifest = nullptr);

}  // namespace ndc::data
