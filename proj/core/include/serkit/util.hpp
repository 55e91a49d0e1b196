#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace serkit {

// Shortest decimal form that round-trips the exact double. Locale-free.
std::string double_str(double v);

std::vector<std::string> split(const std::string& s, char sep);
std::string trim(const std::string& s);
std::string lowercase(std::string s);

// Whole-file helpers; throw IoError on failure.
std::string read_text_file(const std::filesystem::path& p);
void write_text_file(const std::filesystem::path& p, const std::string& body);
std::vector<uint8_t> read_binary_file(const std::filesystem::path& p);
void write_binary_file(const std::filesystem::path& p, const void* data, size_t n);

// FNV-1a, used for stable content-derived file names.
uint64_t fnv1a64(const std::string& s);
std::string hex16(uint64_t v);

}  // namespace serkit
