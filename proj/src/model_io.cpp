#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "isarf/error.hpp"
#include "isarf/isarf_model.hpp"
#include "isarf/util.hpp"

namespace isarf {

namespace {

constexpr const char* kModelMagic = "ISARF-MODEL v1";

std::string real(double v) { return format_general(v, 17); }

class LineReader {
 public:
  LineReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  std::vector<std::string> tokens() {
    std::string line;
    if (!std::getline(in_, line)) fail("unexpected end of model file");
    ++line_no_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ss(line);
    std::vector<std::string> out;
    for (std::string t; ss >> t;) out.push_back(t);
    return out;
  }

  std::vector<std::string> expect(const std::string& key, std::size_t count) {
    auto t = tokens();
    if (t.empty() || t[0] != key) fail("expected '" + key + "'");
    if (count != 0 && t.size() != count) fail("'" + key + "' line has " + std::to_string(t.size()) + " fields");
    return t;
  }

  [[noreturn]] void fail(const std::string& why) const {
    throw DataError(source_ + ":" + std::to_string(line_no_) + ": " + why);
  }

  std::istream& stream() { return in_; }

 private:
  std::istream& in_;
  std::string source_;
  int line_no_ = 0;
};

int to_int(const std::string& s) { return static_cast<int>(parse_integer(s)); }

std::uint64_t to_u64(const std::string& s) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(s, &used, 10);
    if (used != s.size()) throw DataError("bad integer");
    return v;
  } catch (const std::exception&) {
    throw DataError("not an unsigned integer: '" + s + "'");
  }
}

}  // namespace

void write_model(std::ostream& out, const ISarfModel& m) {
  out << kModelMagic << '\n';
  out << "manifest_hash " << format_manifest_hash(m.manifest_hash) << '\n';
  out << "seed " << m.seed << '\n';
  out << "features " << m.feature_names.size() << '\n';
  for (std::size_t j = 0; j < m.feature_names.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    out << m.feature_names[j] << ' ' << real(m.standardization.mean[jj]) << ' ' << real(m.standardization.scale[jj])
        << ' ' << (m.standardization.constant[j] ? 1 : 0) << '\n';
  }
  out << "selected " << m.selected.size() << '\n';
  for (int j : m.selected) out << j << ' ' << m.feature_names[static_cast<std::size_t>(j)] << '\n';
  out << "thresholds " << m.core.thresholds.size();
  for (double t : m.core.thresholds) out << ' ' << real(t);
  out << '\n';
  out << "groups " << m.core.forests.size() << '\n';
  for (std::size_t g = 0; g < m.core.forests.size(); ++g) {
    const RandomForest& f = m.core.forests[g];
    out << "forest " << g << " n_trees " << f.n_trees << " max_depth " << f.max_depth << " mtry " << f.mtry
        << " seed " << f.seed << " n_features " << f.n_features << " prior " << real(f.prior) << '\n';
    for (std::size_t t = 0; t < f.trees.size(); ++t) {
      const auto& nodes = f.trees[t].nodes();
      out << "tree " << t << " nodes " << nodes.size() << '\n';
      for (const TreeNode& n : nodes) {
        out << n.feature << ' ' << real(n.threshold) << ' ' << n.left << ' ' << n.right << ' ' << n.n0 << ' ' << n.n1
            << '\n';
      }
    }
  }
  out << "end\n";
}

void write_model(const std::filesystem::path& path, const ISarfModel& model) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(path.string() + ": cannot open for writing");
  write_model(out, model);
  if (!out) throw DataError(path.string() + ": write failed");
}

ISarfModel read_model(std::istream& in, const std::string& source) {
  LineReader r(in, source);
  std::string magic;
  if (!std::getline(in, magic)) r.fail("empty model file");
  if (!magic.empty() && magic.back() == '\r') magic.pop_back();
  if (magic != kModelMagic) {
    throw DataError(source + ": unsupported model format '" + magic + "' (expected '" + kModelMagic + "')");
  }
  ISarfModel m;
  try {
    auto t = r.expect("manifest_hash", 2);
    m.manifest_hash = std::stoull(t[1], nullptr, 16);
    m.seed = to_u64(r.expect("seed", 2)[1]);

    const int p = to_int(r.expect("features", 2)[1]);
    if (p <= 0) r.fail("feature count must be positive");
    m.standardization.mean.resize(p);
    m.standardization.scale.resize(p);
    m.standardization.constant.assign(static_cast<std::size_t>(p), false);
    for (int j = 0; j < p; ++j) {
      t = r.tokens();
      if (t.size() != 4) r.fail("feature line needs name mean scale constant");
      m.feature_names.push_back(t[0]);
      m.standardization.mean[j] = parse_double(t[1]);
      m.standardization.scale[j] = parse_double(t[2]);
      m.standardization.constant[static_cast<std::size_t>(j)] = t[3] == "1";
    }
    if (FeatureManifest::hash_names(m.feature_names) != m.manifest_hash) r.fail("manifest hash does not match names");

    const int k = to_int(r.expect("selected", 2)[1]);
    for (int i = 0; i < k; ++i) {
      t = r.tokens();
      if (t.size() != 2) r.fail("selected line needs index and name");
      const int j = to_int(t[0]);
      if (j < 0 || j >= p || m.feature_names[static_cast<std::size_t>(j)] != t[1]) r.fail("bad selected feature");
      m.selected.push_back(j);
    }

    t = r.expect("thresholds", 0);
    const int nt = to_int(t.at(1));
    if (static_cast<int>(t.size()) != nt + 2) r.fail("threshold count mismatch");
    for (int i = 0; i < nt; ++i) m.core.thresholds.push_back(parse_double(t[static_cast<std::size_t>(i + 2)]));

    const int groups = to_int(r.expect("groups", 2)[1]);
    if (groups != nt + 1) r.fail("group count must be thresholds + 1");
    for (int g = 0; g < groups; ++g) {
      t = r.expect("forest", 14);
      RandomForest f;
      f.n_trees = to_int(t[3]);
      f.max_depth = to_int(t[5]);
      f.mtry = to_int(t[7]);
      f.seed = to_u64(t[9]);
      f.n_features = to_int(t[11]);
      f.prior = parse_double(t[13]);
      if (f.n_features != k) r.fail("forest feature count differs from the selected set");
      for (int tr = 0; tr < f.n_trees; ++tr) {
        t = r.expect("tree", 4);
        const int count = to_int(t[3]);
        if (count <= 0) r.fail("tree without nodes");
        std::vector<TreeNode> nodes(static_cast<std::size_t>(count));
        for (int idx = 0; idx < count; ++idx) {
          TreeNode& n = nodes[static_cast<std::size_t>(idx)];
          t = r.tokens();
          if (t.size() != 6) r.fail("node line needs 6 fields");
          n.feature = to_int(t[0]);
          n.threshold = parse_double(t[1]);
          n.left = to_int(t[2]);
          n.right = to_int(t[3]);
          n.n0 = to_int(t[4]);
          n.n1 = to_int(t[5]);
          if (!n.is_leaf() && (n.feature >= k || n.left <= idx || n.right <= idx || n.left >= count || n.right >= count)) {
            r.fail("node references out of range");
          }
        }
        f.trees.emplace_back(std::move(nodes));
      }
      m.core.forests.push_back(std::move(f));
    }
    r.expect("end", 1);
  } catch (const DataError&) {
    throw;
  } catch (const std::exception& e) {
    r.fail(e.what());
  }
  return m;
}

ISarfModel read_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path.string() + ": cannot open model file");
  return read_model(in, path.string());
}

}  // namespace isarf
