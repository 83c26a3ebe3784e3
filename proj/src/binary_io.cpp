// Copyright 2026 The d4curate Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "binary_io.hpp"

#include <fstream>
#include <iterator>

#include "d4/error.hpp"

namespace d4::binary {

void Reader::expect_magic(std::string_view magic) {
  require(magic.size(), "magic");
  for (std::size_t i = 0; i < magic.size(); ++i) {
    if (data_[pos_ + i] != static_cast<std::uint8_t>(magic[i])) {
      throw FormatError(pos_, "bad magic, expected \"" + std::string(magic) + "\"");
    }
  }
  pos_ += magic.size();
}

std::string Reader::str(std::size_t len) {
  require(len, "string payload");
  std::string s(reinterpret_cast<const char*>(data_.data() + pos_), len);
  pos_ += len;
  return s;
}

void Reader::require(std::uint64_t n, std::string_view what) const {
  if (n > data_.size() - pos_) {
    throw FormatError(data_.size(), "truncated " + std::string(what) + ": need " +
                                        std::to_string(n) + " bytes at offset " +
                                        std::to_string(pos_) + ", file has " +
                                        std::to_string(data_.size() - pos_));
  }
}

void Reader::expect_end() const {
  if (pos_ != data_.size()) {
    throw FormatError(pos_, std::to_string(data_.size() - pos_) + " trailing bytes");
  }
}

std::uint64_t Reader::get(int width, std::string_view what) {
  require(static_cast<std::uint64_t>(width), what);
  std::uint64_t v = 0;
  for (int i = 0; i < width; ++i) v |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
  pos_ += width;
  return v;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("error reading " + path.string());
  return data;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create " + path.string());
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!out) throw IoError("error writing " + path.string());
}

}  // namespace d4::binary
