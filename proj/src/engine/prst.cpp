// Copyright 2026 The PRSNet-Desk Authors. All Rights Reserved.
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

#include "prs/prst.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <type_traits>

namespace prs {
inline namespace PRS_REAL_ABI {

namespace {

constexpr char kMagic[4] = {'P', 'R', 'S', 'T'};

template <typename U>
void put_le(std::vector<std::uint8_t>& out, U v) {
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class Reader {
 public:
  Reader(std::span<const std::uint8_t> bytes, const std::string& source)
      : bytes_(bytes), source_(source) {}

  template <typename U>
  U get() {
    need(sizeof(U));
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(U(bytes_[pos_ + i]) << (8 * i));
    pos_ += sizeof(U);
    return v;
  }

  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n)
      throw FormatError(source_ + ": truncated PRST payload at byte " + std::to_string(pos_));
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }
  std::size_t pos() const { return pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  const std::string& source_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_prst(const Tensor& t) {
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  put_le<std::uint32_t>(out, kPrstVersion);
  out.push_back(kRealDtypeCode);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.rank()));
  for (std::size_t e : t.shape()) put_le<std::uint32_t>(out, static_cast<std::uint32_t>(e));
  out.reserve(out.size() + t.numel() * sizeof(Real));
  using Bits = std::conditional_t<sizeof(Real) == 4, std::uint32_t, std::uint64_t>;
  for (Real v : t.data()) put_le<Bits>(out, std::bit_cast<Bits>(v));
  return out;
}

Tensor decode_prst(std::span<const std::uint8_t> bytes, const std::string& source) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw FormatError(source + ": bad PRST magic");
  Reader r(bytes.subspan(4), source);
  const auto version = r.get<std::uint32_t>();
  if (version != kPrstVersion)
    throw FormatError(source + ": unsupported PRST version " + std::to_string(version));
  const auto dtype = r.get<std::uint8_t>();
  if (dtype > 1) throw FormatError(source + ": unknown PRST dtype code " + std::to_string(dtype));
  const auto rank = r.get<std::uint32_t>();
  if (rank > 8) throw FormatError(source + ": implausible PRST rank " + std::to_string(rank));
  Shape shape;
  for (std::uint32_t i = 0; i < rank; ++i) {
    const auto e = r.get<std::uint32_t>();
    if (e == 0) throw FormatError(source + ": zero extent in PRST shape");
    shape.push_back(e);
  }
  const std::size_t n = shape_numel(shape);
  const std::size_t width = dtype == 0 ? 4 : 8;
  if (r.remaining() != n * width)
    throw FormatError(source + ": PRST payload holds " + std::to_string(r.remaining()) +
                      " bytes, shape " + shape_string(shape) + " needs " +
                      std::to_string(n * width));
  std::vector<Real> values(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (dtype == 0) {
      values[i] = static_cast<Real>(std::bit_cast<float>(r.get<std::uint32_t>()));
    } else {
      values[i] = static_cast<Real>(std::bit_cast<double>(r.get<std::uint64_t>()));
    }
  }
  return Tensor(std::move(shape), std::move(values));
}

void write_prst(const std::filesystem::path& path, const Tensor& t) {
  const auto bytes = encode_prst(t);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw IoError("failed writing " + path.string());
}

Tensor read_prst(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)),
                                  std::istreambuf_iterator<char>());
  return decode_prst(bytes, path.string());
}

}  // namespace PRS_REAL_ABI
}  // namespace prs
