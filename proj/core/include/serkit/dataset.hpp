#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "serkit/rng.hpp"

namespace serkit::dataset {

// The 8 emotion classes with stable codes 0..7.
enum class EmotionLabel : int {
  neutral = 0,
  calm = 1,
  happy = 2,
  sad = 3,
  angry = 4,
  fearful = 5,
  disgust = 6,
  surprised = 7,
};
constexpr size_t kNumClasses = 8;

const std::string& label_name(EmotionLabel label);
EmotionLabel label_from_name(const std::string& name);  // throws UnknownEmotionCode
EmotionLabel label_from_code(int code);                 // throws UnknownEmotionCode

enum class Corpus { ravdess, savee, synthetic };
enum class Split { train, val, test, unassigned };

const std::string& corpus_name(Corpus c);
const std::string& split_name(Split s);
Corpus corpus_from_name(const std::string& name);
Split split_from_name(const std::string& name);

struct ManifestEntry {
  std::string path;  // relative to the manifest file's directory
  EmotionLabel label = EmotionLabel::neutral;
  std::string actor_id;
  Corpus corpus = Corpus::synthetic;
  Split split = Split::unassigned;
};

struct SplitSpec {
  double train_frac = 0.90;
  double val_frac = 0.05;
  double test_frac = 0.05;
  uint64_t seed = 42;
};

// Filename-code tables. Conventions are external, so they are editable:
// plain "code=label" lines, '#' comments.
using LabelTable = std::map<std::string, EmotionLabel>;
LabelTable default_ravdess_table();
LabelTable default_savee_table();
LabelTable load_label_table(const std::filesystem::path& p);

struct ParsedName {
  EmotionLabel label;
  std::string actor_id;
};

// "03-01-03-01-02-01-12.wav" style: 7 dash-separated 2-digit fields; the
// third is the emotion code, the seventh the actor.
ParsedName parse_ravdess_filename(const std::string& name, const LabelTable& table);
// "DC_a01.wav" style: actor prefix, then a letter code ("sa"/"su" before
// single letters), then digits.
ParsedName parse_savee_filename(const std::string& name, const LabelTable& table);

// Per-class seeded shuffle, then val/test get round(frac * class_count)
// entries each and train the remainder. Splits are disjoint and exhaustive.
std::vector<ManifestEntry> stratified_split(std::vector<ManifestEntry> entries,
                                            const SplitSpec& spec);
// Speaker-disjoint alternative: whole actors are assigned to splits, so the
// per-class fractions are only approximate.
std::vector<ManifestEntry> split_by_actor(std::vector<ManifestEntry> entries,
                                          const SplitSpec& spec);

std::array<size_t, kNumClasses> class_histogram(const std::vector<ManifestEntry>& entries);
std::string class_histogram_csv(const std::vector<ManifestEntry>& entries);

// Desk-scale stand-in corpus: class k is a sine at 150*(1 + 0.35k) Hz,
// amplitude-modulated at (1+k) Hz, with Gaussian noise 30 dB below the
// carrier. WAV payloads are deterministic per seed.
std::vector<ManifestEntry> generate_synthetic_corpus(const std::filesystem::path& out_dir,
                                                     size_t clips_per_class, uint64_t seed,
                                                     uint32_t sample_rate_hz);

// Manifest CSV: header "path,label,actor,corpus,split"; '#' comment lines
// (e.g. the recorded split seed) are ignored on read.
void save_manifest(const std::filesystem::path& p, const std::vector<ManifestEntry>& entries,
                   const std::vector<std::string>& comments = {});
std::vector<ManifestEntry> load_manifest(const std::filesystem::path& p);

// Entry paths are stored relative to the manifest location.
std::filesystem::path resolve_entry_path(const std::filesystem::path& manifest_path,
                                         const ManifestEntry& entry);

}  // namespace serkit::dataset
