// Copyright 2026 The ucmtrack Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Binary tensor files (.ucmt) and text track tables (tracks.txt).
//
// .ucmt layout, all integers little-endian:
//   "UCMT" | version u8 | dtype u8 | ndim u8 | dims u32[ndim] | payload
// The payload is the row-major element array, each element little-endian.

#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ucmtrack/tensor.hpp"

namespace ucmtrack {

enum class DType : std::uint8_t { u8 = 1, u16 = 2, f32 = 3 };

inline constexpr std::uint8_t kTensorFormatVersion = 1;

using AnyTensor = std::variant<Tensor<std::uint8_t>, Tensor<std::uint16_t>, Tensor<float>>;

class DecodeError : public std::runtime_error {
 public:
  DecodeError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " (at byte " + std::to_string(offset) + ")"),
        reason_(what),
        offset_(offset) {}
  std::size_t offset() const { return offset_; }
  const std::string& reason() const { return reason_; }

 private:
  std::string reason_;
  std::size_t offset_;
};

class IoError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

template <typename T>
constexpr DType dtype_of() {
  if constexpr (std::is_same_v<T, std::uint8_t>) return DType::u8;
  else if constexpr (std::is_same_v<T, std::uint16_t>) return DType::u16;
  else {
    static_assert(std::is_same_v<T, float>, "unsupported tensor element type");
    return DType::f32;
  }
}

inline void put_le(std::vector<std::uint8_t>& out, std::uint64_t v, std::size_t bytes) {
  for (std::size_t i = 0; i < bytes; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline std::uint64_t get_le(const std::uint8_t* p, std::size_t bytes) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < bytes; ++i) v |= std::uint64_t{p[i]} << (8 * i);
  return v;
}

template <typename T>
Tensor<T> decode_payload(std::vector<std::size_t> dims, std::span<const std::uint8_t> bytes,
                         std::size_t offset) {
  const std::size_t n = Tensor<T>::volume(dims);
  if (bytes.size() - offset < n * sizeof(T)) {
    throw DecodeError("tensor: truncated payload, expected " +
                          std::to_string(n * sizeof(T)) + " bytes",
                      bytes.size());
  }
  if (bytes.size() - offset > n * sizeof(T)) {
    throw DecodeError("tensor: trailing bytes after payload", offset + n * sizeof(T));
  }
  std::vector<T> data(n);
  const std::uint8_t* p = bytes.data() + offset;
  for (std::size_t i = 0; i < n; ++i, p += sizeof(T)) {
    const std::uint64_t raw = get_le(p, sizeof(T));
    if constexpr (std::is_same_v<T, float>) {
      data[i] = std::bit_cast<float>(static_cast<std::uint32_t>(raw));
    } else {
      data[i] = static_cast<T>(raw);
    }
  }
  return Tensor<T>(std::move(dims), std::move(data));
}

inline std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::string& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace detail

template <typename T>
std::vector<std::uint8_t> encode_tensor(const Tensor<T>& tensor) {
  if (tensor.ndim() > 255) throw std::invalid_argument("tensor: too many axes");
  std::vector<std::uint8_t> out{'U', 'C', 'M', 'T', kTensorFormatVersion,
                                static_cast<std::uint8_t>(detail::dtype_of<T>()),
                                static_cast<std::uint8_t>(tensor.ndim())};
  for (std::size_t d : tensor.dims()) {
    if (d > 0xffffffffu) throw std::invalid_argument("tensor: axis length exceeds u32");
    detail::put_le(out, d, 4);
  }
  out.reserve(out.size() + tensor.size() * sizeof(T));
  for (const T& v : tensor.data()) {
    if constexpr (std::is_same_v<T, float>) {
      detail::put_le(out, std::bit_cast<std::uint32_t>(v), 4);
    } else {
      detail::put_le(out, v, sizeof(T));
    }
  }
  return out;
}

inline AnyTensor decode_tensor(std::span<const std::uint8_t> bytes) {
  constexpr std::size_t kHeader = 7;
  if (bytes.size() < 4) throw DecodeError("tensor: truncated magic", bytes.size());
  if (std::memcmp(bytes.data(), "UCMT", 4) != 0) throw DecodeError("tensor: bad magic", 0);
  if (bytes.size() < kHeader) throw DecodeError("tensor: truncated header", bytes.size());
  if (bytes[4] != kTensorFormatVersion) {
    throw DecodeError("tensor: unsupported version " + std::to_string(bytes[4]), 4);
  }
  const std::uint8_t dtype = bytes[5];
  const std::size_t ndim = bytes[6];
  if (ndim == 0) throw DecodeError("tensor: zero axes", 6);
  std::size_t offset = kHeader;
  if (bytes.size() < offset + 4 * ndim) throw DecodeError("tensor: truncated dims", bytes.size());
  std::vector<std::size_t> dims(ndim);
  for (std::size_t i = 0; i < ndim; ++i, offset += 4) {
    dims[i] = detail::get_le(bytes.data() + offset, 4);
    if (dims[i] == 0) throw DecodeError("tensor: zero-length axis", offset);
  }
  switch (static_cast<DType>(dtype)) {
    case DType::u8: return detail::decode_payload<std::uint8_t>(std::move(dims), bytes, offset);
    case DType::u16: return detail::decode_payload<std::uint16_t>(std::move(dims), bytes, offset);
    case DType::f32: return detail::decode_payload<float>(std::move(dims), bytes, offset);
  }
  throw DecodeError("tensor: unknown dtype code " + std::to_string(dtype), 5);
}

template <typename T>
void write_tensor(const std::string& path, const Tensor<T>& tensor) {
  const auto bytes = encode_tensor(tensor);
  detail::write_file(path, {reinterpret_cast<const char*>(bytes.data()), bytes.size()});
}

inline AnyTensor read_tensor(const std::string& path) {
  const auto bytes = detail::read_file(path);
  try {
    return decode_tensor(bytes);
  } catch (const DecodeError& e) {
    throw DecodeError(path + ": " + e.reason(), e.offset());
  }
}

// Reads a tensor and requires a specific element type.
template <typename T>
Tensor<T> read_tensor_as(const std::string& path) {
  AnyTensor any = read_tensor(path);
  if (auto* t = std::get_if<Tensor<T>>(&any)) return std::move(*t);
  throw IoError(path + ": unexpected tensor dtype");
}

// ---------------------------------------------------------------------------
// Track tables

struct TrackRecord {
  std::uint32_t label = 0;
  std::uint32_t begin = 0;
  std::uint32_t end = 0;
  std::uint32_t parent = 0;

  friend bool operator==(const TrackRecord&, const TrackRecord&) = default;
};

class TrackTableError : public std::runtime_error {
 public:
  TrackTableError(const std::string& what, std::size_t line, const std::string& source = {})
      : std::runtime_error((source.empty() ? "" : source + ": ") +
                           (line ? "line " + std::to_string(line) + ": " : "") + what),
        reason_(what),
        line_(line) {}
  std::size_t line() const { return line_; }
  const std::string& reason() const { return reason_; }

 private:
  std::string reason_;
  std::size_t line_;
};

struct TrackTable {
  std::vector<TrackRecord> records;

  const TrackRecord* find(std::uint32_t label) const {
    for (const auto& r : records) {
      if (r.label == label) return &r;
    }
    return nullptr;
  }

  // Throws TrackTableError naming the 1-based record position on violation.
  void validate() const {
    std::map<std::uint32_t, const TrackRecord*> by_label;
    for (std::size_t i = 0; i < records.size(); ++i) {
      const auto& r = records[i];
      if (r.label == 0) throw TrackTableError("label must be positive", i + 1);
      if (r.begin > r.end) throw TrackTableError("begin after end", i + 1);
      if (!by_label.emplace(r.label, &r).second) {
        throw TrackTableError("duplicate label " + std::to_string(r.label), i + 1);
      }
    }
    for (std::size_t i = 0; i < records.size(); ++i) {
      const auto& r = records[i];
      if (r.parent == 0) continue;
      auto it = by_label.find(r.parent);
      if (it == by_label.end()) {
        throw TrackTableError("parent " + std::to_string(r.parent) + " is not a known label", i + 1);
      }
      if (it->second->end >= r.begin) {
        throw TrackTableError("parent " + std::to_string(r.parent) + " does not end before child begins",
                              i + 1);
      }
    }
  }

  friend bool operator==(const TrackTable&, const TrackTable&) = default;
};

inline std::string format_track_table(const TrackTable& table) {
  table.validate();
  std::string out;
  for (const auto& r : table.records) {
    out += std::to_string(r.label) + ' ' + std::to_string(r.begin) + ' ' +
           std::to_string(r.end) + ' ' + std::to_string(r.parent) + '\n';
  }
  return out;
}

inline TrackTable parse_track_table(std::string_view text) {
  TrackTable table;
  std::vector<std::size_t> record_lines;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string line(text.substr(pos, nl - pos));
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::istringstream in(line);
    long long fields[4];
    for (auto& f : fields) {
      if (!(in >> f)) throw TrackTableError("expected four integers", line_no);
      if (f < 0 || f > 0xffffffffLL) throw TrackTableError("value out of range", line_no);
    }
    std::string rest;
    if (in >> rest) throw TrackTableError("trailing content '" + rest + "'", line_no);
    table.records.push_back({static_cast<std::uint32_t>(fields[0]),
                             static_cast<std::uint32_t>(fields[1]),
                             static_cast<std::uint32_t>(fields[2]),
                             static_cast<std::uint32_t>(fields[3])});
    record_lines.push_back(line_no);
    const auto& r = table.records.back();
    if (r.label == 0) throw TrackTableError("label must be positive", line_no);
    if (r.begin > r.end) throw TrackTableError("begin after end", line_no);
  }
  // Parent references may point forward, so they are checked once all lines
  // are in; validate() reports the record position, mapped back to its line.
  try {
    table.validate();
  } catch (const TrackTableError& e) {
    throw TrackTableError(e.reason(), record_lines.at(e.line() - 1));
  }
  return table;
}

inline void write_track_table(const std::string& path, const TrackTable& table) {
  detail::write_file(path, format_track_table(table));
}

inline TrackTable read_track_table(const std::string& path) {
  const auto bytes = detail::read_file(path);
  try {
    return parse_track_table({reinterpret_cast<const char*>(bytes.data()), bytes.size()});
  } catch (const TrackTableError& e) {
    throw TrackTableError(e.reason(), e.line(), path);
  }
}

}  // namespace ucmtrack
