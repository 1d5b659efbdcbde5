#include "webrank/specfile.hpp"

#include <openssl/evp.h>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "webrank/error.hpp"

namespace webrank {

namespace {

[[noreturn]] void fail(const YAML::Mark& mark, const std::string& field, const std::string& msg,
                       std::optional<std::size_t> position = std::nullopt) {
  throw ParseError("line " + std::to_string(mark.line + 1) + ", field '" + field + "': " + msg,
                   position.value_or(static_cast<std::size_t>(std::max(mark.column, 0)) + 1));
}

template <class T>
T scalar(const YAML::Node& node, const std::string& field) {
  if (!node.IsScalar()) fail(node.Mark(), field, "expected a scalar");
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    fail(node.Mark(), field, "cannot read '" + node.Scalar() + "'");
  }
}

Expr expression(const YAML::Node& node, const std::string& field) {
  const auto text = scalar<std::string>(node, field);
  try {
    return parse(text);
  } catch (const ParseError& e) {
    fail(node.Mark(), field, e.detail(), e.position());
  }
}

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::vector<int> parse_order(std::string_view text, int d) {
  std::vector<int> order;
  std::stringstream ss{std::string(text)};
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      order.push_back(v - 1);
    } catch (const std::exception&) {
      throw ValidationError("order: '" + item + "' is not an integer");
    }
  }
  std::vector<int> sorted = order;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < static_cast<int>(sorted.size()); ++i) {
    if (sorted[static_cast<std::size_t>(i)] != i || static_cast<int>(sorted.size()) != d) {
      throw ValidationError("order must be a permutation of 1.." + std::to_string(d));
    }
  }
  if (order.empty()) throw ValidationError("order must be a permutation of 1.." + std::to_string(d));
  return order;
}

SpecFile parse_webspec(std::string_view text, std::string origin, const SpecOverrides& overrides) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw ParseError("line " + std::to_string(e.mark.line + 1) + ": " + e.msg,
                     static_cast<std::size_t>(std::max(e.mark.pos, 0)));
  }
  if (!root.IsMap()) fail(root.Mark(), "", "expected a mapping at the top level");

  static const std::set<std::string> known{"name", "functions", "box", "samples", "tol", "seed", "relations"};
  for (const auto& kv : root) {
    const auto key = kv.first.as<std::string>();
    if (!known.count(key)) fail(kv.first.Mark(), key, "unknown field");
  }

  SpecFile spec;
  spec.origin = std::move(origin);
  spec.digest = sha256_hex(text);

  const std::string name = root["name"] ? scalar<std::string>(root["name"], "name") : spec.origin;

  const YAML::Node fs = root["functions"];
  if (!fs) fail(root.Mark(), "functions", "missing");
  if (!fs.IsSequence()) fail(fs.Mark(), "functions", "expected a list");
  std::vector<Expr> functions;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    functions.push_back(expression(fs[i], "functions[" + std::to_string(i + 1) + "]"));
  }
  if (functions.size() < 3 || functions.size() > 5) {
    throw ValidationError("a web needs 3 to 5 functions, got " + std::to_string(functions.size()));
  }

  const YAML::Node bn = root["box"];
  if (!bn) fail(root.Mark(), "box", "missing");
  if (!bn.IsSequence() || bn.size() != 4) fail(bn.Mark(), "box", "expected [xmin, xmax, ymin, ymax]");
  Box box{scalar<double>(bn[0], "box"), scalar<double>(bn[1], "box"), scalar<double>(bn[2], "box"),
          scalar<double>(bn[3], "box")};

  SampleConfig cfg;
  if (root["samples"]) cfg.samples = scalar<int>(root["samples"], "samples");
  if (root["tol"]) cfg.tol = scalar<double>(root["tol"], "tol");
  if (root["seed"]) cfg.seed = scalar<std::uint64_t>(root["seed"], "seed");
  if (overrides.samples) cfg.samples = *overrides.samples;
  if (overrides.tol) cfg.tol = *overrides.tol;
  if (overrides.seed) cfg.seed = *overrides.seed;

  const std::size_t d = functions.size();
  if (const YAML::Node rs = root["relations"]) {
    if (!rs.IsSequence()) fail(rs.Mark(), "relations", "expected a list of lists");
    for (std::size_t r = 0; r < rs.size(); ++r) {
      const std::string field = "relations[" + std::to_string(r + 1) + "]";
      if (!rs[r].IsSequence() || rs[r].size() != d) {
        fail(rs[r].Mark(), field, "expected " + std::to_string(d) + " expressions in t");
      }
      std::vector<Expr> rel;
      for (std::size_t i = 0; i < d; ++i) {
        Expr e = expression(rs[r][i], field);
        if (depends_on(e, Var::X) || depends_on(e, Var::Y)) fail(rs[r][i].Mark(), field, "must depend on t only");
        rel.push_back(e);
      }
      spec.relations.push_back(std::move(rel));
    }
  }

  spec.web = make_web(std::move(functions), box, cfg, name);
  if (!overrides.order.empty()) {
    std::vector<int> sorted = overrides.order;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      if (sorted[i] != static_cast<int>(i) || sorted.size() != d) {
        throw ValidationError("order must be a permutation of 1.." + std::to_string(d));
      }
    }
    spec.order = overrides.order;
    spec.web = reorder(spec.web, spec.order);
    for (auto& rel : spec.relations) {
      std::vector<Expr> moved;
      for (int i : spec.order) moved.push_back(rel[static_cast<std::size_t>(i)]);
      rel = std::move(moved);
    }
  }
  return spec;
}

SpecFile load_webspec(const std::string& path, const SpecOverrides& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open spec file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_webspec(buf.str(), path, overrides);
}

}  // namespace webrank
