#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace anderson {

// fixed decimal rendering so rerun outputs are byte-identical
std::string fmt_double(double x);

std::string join_csv(const std::vector<std::string>& fields);

// FNV-1a 64-bit content fingerprint (not cryptographic)
uint64_t fnv1a64(const std::string& bytes);
std::string fnv1a64_hex(const std::string& bytes);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& body);

std::string iso8601_now();

}  // namespace anderson
