#include "serkit/checkpoint.hpp"

#include <cstring>

#include "serkit/errors.hpp"
#include "serkit/util.hpp"

namespace serkit {

namespace {
constexpr const char* kHeaderMagic = "SERKITCKPT 1";
constexpr const char* kHeaderEnd = "---";
}  // namespace

const FeatureTensor* Checkpoint::find(const std::string& name) const {
  for (const auto& [n, t] : tensors)
    if (n == name) return &t;
  return nullptr;
}

void Checkpoint::add(const std::string& name, FeatureTensor t) {
  if (find(name) != nullptr) throw IoError("duplicate checkpoint tensor " + name);
  tensors.emplace_back(name, std::move(t));
}

void save_checkpoint(const std::filesystem::path& p, const Checkpoint& ckpt) {
  std::vector<uint8_t> payload;
  std::string index;
  for (const auto& [name, t] : ckpt.tensors) {
    auto blob = sert_encode(t);
    index += name + "," + std::to_string(payload.size()) + "," +
             std::to_string(blob.size()) + "\n";
    payload.insert(payload.end(), blob.begin(), blob.end());
  }

  std::string header = std::string(kHeaderMagic) + "\n";
  header += "kind=" + ckpt.kind + "\n";
  for (const auto& [k, v] : ckpt.meta) header += "meta." + k + "=" + v + "\n";
  header += "tensors=" + std::to_string(ckpt.tensors.size()) + "\n";
  header += index;
  header += "payload=" + std::to_string(payload.size()) + "\n";
  header += std::string(kHeaderEnd) + "\n";

  std::vector<uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), payload.begin(), payload.end());
  write_binary_file(p, out.data(), out.size());
}

Checkpoint load_checkpoint(const std::filesystem::path& p) {
  const auto bytes = read_binary_file(p);
  size_t pos = 0;
  auto next_line = [&]() -> std::string {
    size_t end = pos;
    while (end < bytes.size() && bytes[end] != '\n') ++end;
    if (end >= bytes.size()) throw IoError("truncated checkpoint header in " + p.string());
    std::string line(reinterpret_cast<const char*>(bytes.data() + pos), end - pos);
    pos = end + 1;
    return line;
  };

  if (next_line() != kHeaderMagic) throw IoError("bad checkpoint magic in " + p.string());
  Checkpoint ckpt;
  std::vector<std::tuple<std::string, size_t, size_t>> index;
  size_t payload_len = 0;
  std::string line = next_line();
  if (line.rfind("kind=", 0) != 0) throw IoError("checkpoint missing kind");
  ckpt.kind = line.substr(5);

  for (;;) {
    line = next_line();
    if (line == kHeaderEnd) break;
    if (line.rfind("meta.", 0) == 0) {
      auto eq = line.find('=');
      if (eq == std::string::npos) throw IoError("bad checkpoint meta line");
      ckpt.meta[line.substr(5, eq - 5)] = line.substr(eq + 1);
    } else if (line.rfind("tensors=", 0) == 0 || line.rfind("payload=", 0) == 0) {
      if (line.rfind("payload=", 0) == 0) payload_len = std::stoull(line.substr(8));
    } else {
      auto fields = split(line, ',');
      if (fields.size() != 3) throw IoError("bad checkpoint index line '" + line + "'");
      index.emplace_back(fields[0], std::stoull(fields[1]), std::stoull(fields[2]));
    }
  }

  if (pos + payload_len != bytes.size())
    throw IoError("checkpoint payload size mismatch in " + p.string());
  for (const auto& [name, off, len] : index) {
    if (off + len > payload_len) throw IoError("checkpoint tensor out of bounds: " + name);
    ckpt.add(name, sert_decode(bytes.data() + pos + off, len));
  }
  return ckpt;
}

}  // namespace serkit
