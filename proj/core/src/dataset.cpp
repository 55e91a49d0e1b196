#include "serkit/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "serkit/audio_io.hpp"
#include "serkit/errors.hpp"
#include "serkit/util.hpp"

namespace serkit::dataset {

namespace {

const std::array<std::string, kNumClasses> kLabelNames = {
    "neutral", "calm", "happy", "sad", "angry", "fearful", "disgust", "surprised"};

const std::array<std::string, 3> kCorpusNames = {"ravdess", "savee", "synthetic"};
const std::array<std::string, 4> kSplitNames = {"train", "val", "test", "unassigned"};

bool all_digits(const std::string& s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

std::string strip_extension(const std::string& name) {
  auto base = std::filesystem::path(name).filename().string();
  auto dot = base.rfind('.');
  return dot == std::string::npos ? base : base.substr(0, dot);
}

}  // namespace

const std::string& label_name(EmotionLabel label) {
  return kLabelNames[static_cast<size_t>(label)];
}

EmotionLabel label_from_name(const std::string& name) {
  for (size_t i = 0; i < kNumClasses; ++i)
    if (kLabelNames[i] == name) return static_cast<EmotionLabel>(i);
  throw UnknownEmotionCode("no emotion named '" + name + "'");
}

EmotionLabel label_from_code(int code) {
  if (code < 0 || code >= static_cast<int>(kNumClasses))
    throw UnknownEmotionCode("emotion code " + std::to_string(code) + " out of range");
  return static_cast<EmotionLabel>(code);
}

const std::string& corpus_name(Corpus c) { return kCorpusNames[static_cast<size_t>(c)]; }
const std::string& split_name(Split s) { return kSplitNames[static_cast<size_t>(s)]; }

Corpus corpus_from_name(const std::string& name) {
  for (size_t i = 0; i < kCorpusNames.size(); ++i)
    if (kCorpusNames[i] == name) return static_cast<Corpus>(i);
  throw BadFilename("unknown corpus '" + name + "'");
}

Split split_from_name(const std::string& name) {
  for (size_t i = 0; i < kSplitNames.size(); ++i)
    if (kSplitNames[i] == name) return static_cast<Split>(i);
  throw BadFilename("unknown split '" + name + "'");
}

LabelTable default_ravdess_table() {
  return {{"01", EmotionLabel::neutral},  {"02", EmotionLabel::calm},
          {"03", EmotionLabel::happy},    {"04", EmotionLabel::sad},
          {"05", EmotionLabel::angry},    {"06", EmotionLabel::fearful},
          {"07", EmotionLabel::disgust},  {"08", EmotionLabel::surprised}};
}

LabelTable default_savee_table() {
  return {{"a", EmotionLabel::angry},   {"d", EmotionLabel::disgust},
          {"f", EmotionLabel::fearful}, {"h", EmotionLabel::happy},
          {"n", EmotionLabel::neutral}, {"sa", EmotionLabel::sad},
          {"su", EmotionLabel::surprised}};
}

LabelTable load_label_table(const std::filesystem::path& p) {
  LabelTable table;
  for (const auto& raw : split(read_text_file(p), '\n')) {
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw IoError("bad label table line '" + line + "' in " + p.string());
    std::string code = trim(line.substr(0, eq));
    std::string name = trim(line.substr(eq + 1));
    table[code] = label_from_name(lowercase(name));
  }
  if (table.empty()) throw IoError("empty label table " + p.string());
  return table;
}

ParsedName parse_ravdess_filename(const std::string& name, const LabelTable& table) {
  const std::string base = strip_extension(name);
  const auto fields = split(base, '-');
  if (fields.size() != 7)
    throw BadFilename("'" + name + "': expected 7 dash-separated fields, got " +
                      std::to_string(fields.size()));
  for (const auto& f : fields)
    if (f.size() != 2 || !all_digits(f))
      throw BadFilename("'" + name + "': field '" + f + "' is not a 2-digit code");
  auto it = table.find(fields[2]);
  if (it == table.end())
    throw UnknownEmotionCode("'" + name + "': emotion code '" + fields[2] +
                             "' not in table");
  return {it->second, fields[6]};
}

ParsedName parse_savee_filename(const std::string& name, const LabelTable& table) {
  const std::string base = strip_extension(name);
  const auto us = base.rfind('_');
  if (us == std::string::npos || us == 0 || us + 1 >= base.size())
    throw BadFilename("'" + name + "': expected <actor>_<code><index>");
  const std::string actor = base.substr(0, us);
  const std::string rest = base.substr(us + 1);

  size_t letters = 0;
  while (letters < rest.size() &&
         std::isalpha(static_cast<unsigned char>(rest[letters])))
    ++letters;
  if (letters == 0 || !all_digits(rest.substr(letters)))
    throw BadFilename("'" + name + "': expected letter code followed by digits");

  const std::string code = lowercase(rest.substr(0, letters));
  auto it = table.find(code);
  if (it == table.end())
    throw UnknownEmotionCode("'" + name + "': emotion code '" + code + "' not in table");
  return {it->second, actor};
}

namespace {

void check_split_spec(const SplitSpec& spec) {
  if (spec.train_frac < 0 || spec.val_frac < 0 || spec.test_frac < 0)
    throw ShapeMismatch("split fractions must be >= 0");
  if (std::abs(spec.train_frac + spec.val_frac + spec.test_frac - 1.0) > 1e-9)
    throw ShapeMismatch("split fractions must sum to 1");
}

}  // namespace

std::vector<ManifestEntry> stratified_split(std::vector<ManifestEntry> entries,
                                            const SplitSpec& spec) {
  check_split_spec(spec);
  if (entries.empty()) throw EmptyManifest("no entries to split");

  Rng rng(spec.seed);
  for (size_t cls = 0; cls < kNumClasses; ++cls) {
    std::vector<size_t> idx;
    for (size_t i = 0; i < entries.size(); ++i)
      if (static_cast<size_t>(entries[i].label) == cls) idx.push_back(i);
    if (idx.empty()) continue;

    rng.shuffle(idx);
    const size_t n = idx.size();
    const size_t n_val = static_cast<size_t>(std::llround(spec.val_frac * n));
    const size_t n_test = static_cast<size_t>(std::llround(spec.test_frac * n));
    if (n_val + n_test > n)
      throw ShapeMismatch("val+test rounding exceeds class count");
    for (size_t j = 0; j < n; ++j) {
      Split s = j < n_val             ? Split::val
                : j < n_val + n_test  ? Split::test
                                      : Split::train;
      entries[idx[j]].split = s;
    }
  }
  return entries;
}

std::vector<ManifestEntry> split_by_actor(std::vector<ManifestEntry> entries,
                                          const SplitSpec& spec) {
  check_split_spec(spec);
  if (entries.empty()) throw EmptyManifest("no entries to split");

  std::map<std::string, size_t> counts;
  for (const auto& e : entries) counts[e.actor_id]++;
  std::vector<std::string> actors;
  for (const auto& [actor, n] : counts) actors.push_back(actor);
  Rng rng(spec.seed);
  rng.shuffle(actors);

  const double total = static_cast<double>(entries.size());
  const size_t want_test = static_cast<size_t>(std::llround(spec.test_frac * total));
  const size_t want_val = static_cast<size_t>(std::llround(spec.val_frac * total));

  std::map<std::string, Split> assignment;
  size_t got_test = 0, got_val = 0;
  for (const auto& actor : actors) {
    if (got_test < want_test) {
      assignment[actor] = Split::test;
      got_test += counts[actor];
    } else if (got_val < want_val) {
      assignment[actor] = Split::val;
      got_val += counts[actor];
    } else {
      assignment[actor] = Split::train;
    }
  }
  for (auto& e : entries) e.split = assignment[e.actor_id];
  return entries;
}

std::array<size_t, kNumClasses> class_histogram(const std::vector<ManifestEntry>& entries) {
  std::array<size_t, kNumClasses> hist{};
  for (const auto& e : entries) hist[static_cast<size_t>(e.label)]++;
  return hist;
}

std::string class_histogram_csv(const std::vector<ManifestEntry>& entries) {
  const auto hist = class_histogram(entries);
  std::string out = "label,count\n";
  for (size_t i = 0; i < kNumClasses; ++i)
    out += kLabelNames[i] + "," + std::to_string(hist[i]) + "\n";
  return out;
}

std::vector<ManifestEntry> generate_synthetic_corpus(const std::filesystem::path& out_dir,
                                                     size_t clips_per_class, uint64_t seed,
                                                     uint32_t sample_rate_hz) {
  if (clips_per_class < 1) throw ShapeMismatch("clips_per_class must be >= 1");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec && !std::filesystem::is_directory(out_dir))
    throw IoError("cannot create " + out_dir.string());

  constexpr double kTwoPi = 6.28318530717958647692;
  const double noise_amp = 0.65 * std::pow(10.0, -30.0 / 20.0);

  std::vector<ManifestEntry> entries;
  for (size_t k = 0; k < kNumClasses; ++k) {
    const double f0 = 150.0 * (1.0 + 0.35 * static_cast<double>(k));
    const double f_mod = 1.0 + static_cast<double>(k);
    for (size_t j = 0; j < clips_per_class; ++j) {
      // Per-clip stream so generation order never matters.
      Rng rng(splitmix64(seed ^ (k * 1000003ULL + j + 1)));
      const double dur = rng.uniform(2.0, 4.0);
      const size_t n = static_cast<size_t>(std::llround(dur * sample_rate_hz));

      audio_io::AudioClip clip;
      clip.sample_rate_hz = sample_rate_hz;
      clip.samples.resize(n);
      for (size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / sample_rate_hz;
        const double env = 0.55 + 0.45 * std::sin(kTwoPi * f_mod * t);
        double x = 0.65 * env * std::sin(kTwoPi * f0 * t) + noise_amp * rng.normal();
        clip.samples[i] = std::clamp(x, -1.0, 1.0);
      }

      char fname[64];
      std::snprintf(fname, sizeof(fname), "synth_c%zu_i%03zu.wav", k, j);
      audio_io::encode_wav(out_dir / fname, clip);

      ManifestEntry e;
      e.path = fname;
      e.label = static_cast<EmotionLabel>(k);
      e.actor_id = "a" + std::to_string(j % 4);
      e.corpus = Corpus::synthetic;
      e.split = Split::unassigned;
      entries.push_back(std::move(e));
    }
  }
  return entries;
}

void save_manifest(const std::filesystem::path& p, const std::vector<ManifestEntry>& entries,
                   const std::vector<std::string>& comments) {
  std::string out;
  for (const auto& c : comments) out += "# " + c + "\n";
  out += "path,label,actor,corpus,split\n";
  for (const auto& e : entries)
    out += e.path + "," + label_name(e.label) + "," + e.actor_id + "," +
           corpus_name(e.corpus) + "," + split_name(e.split) + "\n";
  write_text_file(p, out);
}

std::vector<ManifestEntry> load_manifest(const std::filesystem::path& p) {
  std::vector<ManifestEntry> entries;
  bool saw_header = false;
  for (const auto& raw : split(read_text_file(p), '\n')) {
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (!saw_header) {
      if (line != "path,label,actor,corpus,split")
        throw IoError("unexpected manifest header in " + p.string());
      saw_header = true;
      continue;
    }
    auto fields = split(line, ',');
    if (fields.size() != 5)
      throw IoError("bad manifest row '" + line + "' in " + p.string());
    ManifestEntry e;
    e.path = fields[0];
    e.label = label_from_name(fields[1]);
    e.actor_id = fields[2];
    e.corpus = corpus_from_name(fields[3]);
    e.split = split_from_name(fields[4]);
    if (e.path.empty()) throw IoError("empty path in manifest " + p.string());
    entries.push_back(std::move(e));
  }
  if (!saw_header) throw IoError("manifest " + p.string() + " has no header");
  return entries;
}

std::filesystem::path resolve_entry_path(const std::filesystem::path& manifest_path,
                                         const ManifestEntry& entry) {
  std::filesystem::path p(entry.path);
  if (p.is_absolute()) return p;
  return manifest_path.parent_path() / p;
}

}  // namespace serkit::dataset
