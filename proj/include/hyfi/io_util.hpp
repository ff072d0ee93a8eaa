#pragma once

// Little-endian byte packing and atomic file replacement shared by the
// on-disk formats.

#include <bit>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hyfi::io {

class ByteWriter {
 public:
  void u32(std::uint32_t v);
  void f64(double v);
  void bytes(std::string_view s);
  const std::string& data() const { return buf_; }

 private:
  std::string buf_;
};

/// Reads little-endian values; truncation throws FormatError with the offset.
class ByteReader {
 public:
  explicit ByteReader(std::string_view data) : data_(data) {}

  std::uint32_t u32(std::string_view what);
  double f64(std::string_view what);
  std::string_view bytes(std::size_t n, std::string_view what);
  std::size_t offset() const { return pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  void need(std::size_t n, std::string_view what) const;

  std::string_view data_;
  std::size_t pos_ = 0;
};

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Writes to a sibling temporary file, then renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace hyfi::io
