#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fisheyegt/errors.hpp"

namespace fisheyegt::binary {

// Little-endian packing helpers shared by the on-disk formats.

template <typename T>
T to_little(T v) noexcept {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<std::byte, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
  return v;
}

class Writer {
 public:
  explicit Writer(std::vector<std::byte>& out) : out_(out) {}

  template <typename T>
  void put(T value) {
    const T le = to_little(value);
    const auto* p = reinterpret_cast<const std::byte*>(&le);
    out_.insert(out_.end(), p, p + sizeof(T));
  }
  void put_bytes(std::span<const std::byte> bytes) {
    out_.insert(out_.end(), bytes.begin(), bytes.end());
  }
  void put_text(std::string_view s) {
    const auto* p = reinterpret_cast<const std::byte*>(s.data());
    out_.insert(out_.end(), p, p + s.size());
  }

 private:
  std::vector<std::byte>& out_;
};

class Reader {
 public:
  Reader(std::span<const std::byte> in, std::string_view what) : in_(in), what_(what) {}

  template <typename T>
  T get() {
    require(sizeof(T));
    T v;
    std::memcpy(&v, in_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return to_little(v);
  }
  std::span<const std::byte> get_bytes(std::size_t n) {
    require(n);
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const noexcept { return in_.size() - pos_; }
  std::size_t position() const noexcept { return pos_; }

 private:
  void require(std::size_t n) const {
    if (in_.size() - pos_ < n) {
      throw FormatError(std::string(what_) + ": truncated stream");
    }
  }

  std::span<const std::byte> in_;
  std::string_view what_;
  std::size_t pos_ = 0;
};

}  // namespace fisheyegt::binary
