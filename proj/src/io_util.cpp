#include "hyfi/io_util.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hyfi::io {

void ByteWriter::u32(std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

void ByteWriter::f64(double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>((bits >> (8 * i)) & 0xFFu));
}

void ByteWriter::bytes(std::string_view s) { buf_.append(s); }

void ByteReader::need(std::size_t n, std::string_view what) const {
  if (data_.size() - pos_ < n) {
    throw FormatError("truncated data at byte offset " + std::to_string(pos_) + ": expected " +
                      std::to_string(n) + " more byte(s) for " + std::string(what) + ", found " +
                      std::to_string(data_.size() - pos_));
  }
}

std::uint32_t ByteReader::u32(std::string_view what) {
  need(4, what);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
  }
  pos_ += 4;
  return v;
}

double ByteReader::f64(std::string_view what) {
  need(8, what);
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) {
    bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
  }
  pos_ += 8;
  return std::bit_cast<double>(bits);
}

std::string_view ByteReader::bytes(std::size_t n, std::string_view what) {
  need(n, what);
  auto out = data_.substr(pos_, n);
  pos_ += n;
  return out;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace hyfi::io
