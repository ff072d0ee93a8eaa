#include <map>
#include <sstream>
#include <stdexcept>

#include "hyfi/io_util.hpp"
#include "hyfi/model.hpp"

namespace hyfi::model {

namespace {

constexpr std::string_view kFormat = "hyfi-checkpoint";
constexpr int kVersion = 1;

std::filesystem::path with_suffix(const std::filesystem::path& stem, const char* suffix) {
  auto p = stem;
  p += suffix;
  return p;
}

std::map<std::string, std::string> parse_manifest(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) {
      throw io::FormatError("checkpoint manifest line " + std::to_string(lineno) +
                            " is not 'key = value'");
    }
    kv[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return kv;
}

const std::string& get(const std::map<std::string, std::string>& kv, const std::string& key) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw io::FormatError("checkpoint manifest lacks key '" + key + "'");
  return it->second;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& stem, const HyfiParams& params) {
  const auto& c = params.config;
  const auto blob_path = with_suffix(stem, ".bin");
  std::ostringstream m;
  m << "format = " << kFormat << "\n";
  m << "version = " << kVersion << "\n";
  m << "d = " << c.d << "\n";
  m << "d_b = " << c.d_b << "\n";
  m << "loss_mode = " << to_string(c.loss_mode) << "\n";
  m << "ablation = " << to_string(c.ablation) << "\n";
  m << "t_input = " << to_string(c.t_input) << "\n";
  m << "fix_alpha_v = " << (c.fix_alpha_v ? 1 : 0) << "\n";
  if (c.forced_t) {
    std::ostringstream t;
    t.precision(17);
    t << *c.forced_t;
    m << "forced_t = " << t.str() << "\n";
  } else {
    m << "forced_t = none\n";
  }
  m << "blob = " << blob_path.filename().string() << "\n";
  m << "count = " << params.values.size() << "\n";
  for (const auto& s : params.values.layout().slices()) {
    m << "slice." << s.name << " = " << s.offset << " " << s.rows << " " << s.cols << "\n";
  }

  io::ByteWriter blob;
  for (double x : params.values.flat()) blob.f64(x);
  io::write_file_atomic(blob_path, blob.data());
  io::write_file_atomic(with_suffix(stem, ".manifest"), m.str());
}

HyfiParams load_checkpoint(const std::filesystem::path& stem) {
  const auto kv = parse_manifest(io::read_file(with_suffix(stem, ".manifest")));
  if (get(kv, "format") != kFormat) throw io::FormatError("not a hyfi checkpoint manifest");
  if (get(kv, "version") != std::to_string(kVersion)) {
    throw io::FormatError("unsupported checkpoint version " + get(kv, "version"));
  }
  ModelConfig c;
  c.d = std::stoul(get(kv, "d"));
  c.d_b = std::stoul(get(kv, "d_b"));
  c.loss_mode = parse_loss_mode(get(kv, "loss_mode"));
  c.ablation = parse_ablation(get(kv, "ablation"));
  c.t_input = parse_coefficient_input(get(kv, "t_input"));
  c.fix_alpha_v = get(kv, "fix_alpha_v") == "1";
  if (const auto& t = get(kv, "forced_t"); t != "none") c.forced_t = std::stod(t);

  auto layout = make_layout(c);
  for (const auto& s : layout.slices()) {
    std::istringstream in(get(kv, "slice." + s.name));
    std::size_t offset = 0, rows = 0, cols = 0;
    in >> offset >> rows >> cols;
    if (offset != s.offset || rows != s.rows || cols != s.cols) {
      throw io::FormatError("checkpoint slice '" + s.name + "' does not match the model layout");
    }
  }
  const std::size_t count = std::stoul(get(kv, "count"));
  if (count != layout.size()) {
    throw io::FormatError("checkpoint holds " + std::to_string(count) +
                          " parameters, layout needs " + std::to_string(layout.size()));
  }
  const auto blob_path = stem.parent_path() / get(kv, "blob");
  const auto bytes = io::read_file(blob_path);
  io::ByteReader reader(bytes);
  std::vector<double> flat(count);
  for (auto& x : flat) x = reader.f64("parameter value");
  if (reader.remaining() != 0) {
    throw io::FormatError("checkpoint blob has " + std::to_string(reader.remaining()) +
                          " trailing byte(s)");
  }
  return HyfiParams{c, grad::ParamVector(std::move(layout), std::move(flat))};
}

}  // namespace hyfi::model
