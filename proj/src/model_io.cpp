#include "dage/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "dage/error.hpp"

namespace dage {

using ordered_json = nlohmann::ordered_json;

namespace {

constexpr char kMagic[5] = {'D', 'A', 'G', 'E', '1'};

void put_u64(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 8);
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) throw Error("FormatError", "truncated model file");
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

ordered_json geometry_config_json(const GeometryConfig& c) {
  ordered_json j;
  j["alpha_in"] = c.alpha_in;
  j["softplus_beta"] = c.softplus_beta;
  j["cone_lambda"] = c.cone_lambda;
  return j;
}

}  // namespace

void save_model(ModelParams& model, const std::vector<std::string>& entity_names,
                const std::vector<std::string>& relation_names, const ordered_json& config,
                const std::filesystem::path& path) {
  ordered_json header;
  header["geometry"] = geometry_name(model.geometry);
  header["dim"] = model.dim;
  header["n_entities"] = model.n_entities();
  header["n_relations"] = model.n_relations();
  ordered_json shapes = ordered_json::array();
  for (Parameter* p : model.parameters()) shapes.push_back({{"name", p->name}, {"shape", p->value.shape}});
  header["net_shapes"] = shapes;
  header["geometry_config"] = geometry_config_json(model.config);
  header["config"] = config;
  header["entities"] = entity_names;
  header["relations"] = relation_names;
  const std::string text = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(kMagic, sizeof kMagic);
  put_u64(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (Parameter* p : model.parameters())
    for (double x : p->value.data) put_u64(out, std::bit_cast<std::uint64_t>(x));
  if (!out) throw IoError("write failed for " + path.string());
}

ModelFile load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  char magic[5];
  if (!in.read(magic, 5) || std::memcmp(magic, kMagic, 5) != 0) throw Error("FormatError", "not a DAGE1 model file");
  const std::uint64_t len = get_u64(in);
  if (len > (1ULL << 32)) throw Error("FormatError", "implausible header length");
  std::string text(len, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(len))) throw Error("FormatError", "truncated header");

  ModelFile mf;
  try {
    const auto h = nlohmann::json::parse(text);
    GeometryConfig gc;
    const auto& g = h.at("geometry_config");
    gc.alpha_in = g.at("alpha_in").get<double>();
    gc.softplus_beta = g.at("softplus_beta").get<double>();
    gc.cone_lambda = g.at("cone_lambda").get<double>();
    mf.model = ModelParams(parse_geometry(h.at("geometry").get<std::string>()), h.at("dim").get<std::size_t>(),
                           h.at("n_entities").get<std::size_t>(), h.at("n_relations").get<std::size_t>(), 0, gc);
    const auto& shapes = h.at("net_shapes");
    const auto params = mf.model.parameters();
    if (shapes.size() != params.size()) throw std::invalid_argument("parameter count mismatch");
    for (std::size_t i = 0; i < params.size(); ++i) {
      if (shapes[i].at("name").get<std::string>() != params[i]->name ||
          shapes[i].at("shape").get<std::vector<std::size_t>>() != params[i]->value.shape)
        throw std::invalid_argument("parameter " + params[i]->name + " does not match the header");
    }
    mf.entity_names = h.at("entities").get<std::vector<std::string>>();
    mf.relation_names = h.at("relations").get<std::vector<std::string>>();
    mf.config = ordered_json::parse(h.at("config").dump());
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error("FormatError", std::string("bad model header: ") + e.what());
  }
  for (Parameter* p : mf.model.parameters())
    for (double& x : p->value.data) x = std::bit_cast<double>(get_u64(in));
  if (in.peek() != std::char_traits<char>::eof()) throw Error("FormatError", "trailing bytes after parameters");
  return mf;
}

}  // namespace dage
