// Copyright 2026 The ARC Authors
// SPDX-License-Identifier: Apache-2.0
#include "arc/bytes.hpp"

#include <bit>

#include "arc/errors.hpp"

namespace arc {

void ByteWriter::put_u32(std::uint32_t v) {
  for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::put_u64(std::uint64_t v) {
  for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::put_f64(double v) { put_u64(std::bit_cast<std::uint64_t>(v)); }

void ByteWriter::put_string(std::string_view s) {
  put_u64(s.size());
  bytes_.insert(bytes_.end(), s.begin(), s.end());
}

void ByteWriter::put_raw(std::span<const std::uint8_t> raw) {
  bytes_.insert(bytes_.end(), raw.begin(), raw.end());
}

void ByteWriter::put_f64s(std::span<const double> values) {
  put_u64(values.size());
  for (double v : values) put_f64(v);
}

void ByteReader::need(std::size_t n) const {
  if (bytes_.size() - pos_ < n) throw DataError("ByteReader: truncated input");
}

std::uint32_t ByteReader::get_u32() {
  need(4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_++]) << (8 * i);
  return v;
}

std::uint64_t ByteReader::get_u64() {
  need(8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_++]) << (8 * i);
  return v;
}

double ByteReader::get_f64() { return std::bit_cast<double>(get_u64()); }

std::string ByteReader::get_string() {
  const auto n = get_u64();
  need(n);
  std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
  pos_ += n;
  return s;
}

std::vector<double> ByteReader::get_f64s() {
  const auto n = get_u64();
  need(n * 8);
  std::vector<double> out(n);
  for (auto& v : out) v = get_f64();
  return out;
}

void ByteReader::get_f64s_into(std::span<double> out) {
  const auto n = get_u64();
  if (n != out.size()) throw DataError("ByteReader: array length mismatch");
  need(n * 8);
  for (auto& v : out) v = get_f64();
}

std::span<const std::uint8_t> ByteReader::get_raw(std::size_t n) {
  need(n);
  auto s = bytes_.subspan(pos_, n);
  pos_ += n;
  return s;
}

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (auto b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace arc
