#include <string>

#include "hyfi/io_util.hpp"
#include "hyfi/synth.hpp"

namespace hyfi::synth {

namespace {

constexpr std::string_view kMagic = "HYFI";
constexpr std::uint32_t kVersion = 1;

void put_vector(io::ByteWriter& w, const std::vector<double>& v, std::size_t n,
                const char* what) {
  if (v.size() != n) {
    throw std::invalid_argument(std::string(what) + " has " + std::to_string(v.size()) +
                                " entries, header declares " + std::to_string(n));
  }
  for (double x : v) w.f64(x);
}

std::vector<double> get_vector(io::ByteReader& r, std::size_t n, const char* what) {
  std::vector<double> v(n);
  for (auto& x : v) x = r.f64(what);
  return v;
}

}  // namespace

std::string encode_embeddings(const PairedDataset& ds) {
  io::ByteWriter w;
  w.bytes(kMagic);
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(ds.items.size()));
  w.u32(static_cast<std::uint32_t>(ds.d_semantic));
  w.u32(static_cast<std::uint32_t>(ds.d_perceptual));
  w.u32(static_cast<std::uint32_t>(ds.d_brain));
  for (const auto& item : ds.items) {
    w.u32(item.concept_id);
    put_vector(w, item.semantic, ds.d_semantic, "semantic feature");
    put_vector(w, item.perceptual, ds.d_perceptual, "perceptual feature");
    put_vector(w, item.brain, ds.d_brain, "brain signal");
  }
  return w.data();
}

PairedDataset decode_embeddings(std::string_view bytes) {
  io::ByteReader r(bytes);
  const auto magic = r.bytes(4, "magic");
  if (magic != kMagic) {
    throw io::FormatError("bad magic at byte offset 0: expected \"HYFI\", found \"" +
                          std::string(magic) + "\"");
  }
  const auto version = r.u32("version");
  if (version != kVersion) {
    throw io::FormatError("unsupported HYFI version " + std::to_string(version) +
                          " at byte offset 4 (expected 1)");
  }
  const auto n = r.u32("item count");
  PairedDataset ds;
  ds.d_semantic = r.u32("semantic dimension");
  ds.d_perceptual = r.u32("perceptual dimension");
  ds.d_brain = r.u32("brain dimension");
  ds.items.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    PairedItem item;
    item.concept_id = r.u32("concept id");
    item.semantic = get_vector(r, ds.d_semantic, "semantic feature");
    item.perceptual = get_vector(r, ds.d_perceptual, "perceptual feature");
    item.brain = get_vector(r, ds.d_brain, "brain signal");
    ds.items.push_back(std::move(item));
  }
  if (r.remaining() != 0) {
    throw io::FormatError("unexpected " + std::to_string(r.remaining()) +
                          " trailing byte(s) at byte offset " + std::to_string(r.offset()));
  }
  return ds;
}

void write_embeddings(const std::filesystem::path& path, const PairedDataset& dataset) {
  io::write_file_atomic(path, encode_embeddings(dataset));
}

PairedDataset read_embeddings(const std::filesystem::path& path) {
  return decode_embeddings(io::read_file(path));
}

}  // namespace hyfi::synth
