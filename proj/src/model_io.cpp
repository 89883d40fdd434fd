#include <bit>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "informed/proposal.hpp"

namespace informed {

namespace {

static_assert(std::endian::native == std::endian::little, "model files assume a little-endian host");

constexpr char kMagic[8] = {'I', 'N', 'F', 'M', 'O', 'D', 'E', 'L'};
constexpr std::uint32_t kVersion = 1;

class Writer {
 public:
  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  void u32(std::uint32_t v) { raw(&v, 4); }
  void u64(std::uint64_t v) { raw(&v, 8); }
  void i64(std::int64_t v) { raw(&v, 8); }
  void f64(double v) { raw(&v, 8); }
  void str(const std::string& s) {
    u64(s.size());
    raw(s.data(), s.size());
  }
  void f64s(const std::vector<double>& v) {
    u64(v.size());
    raw(v.data(), v.size() * 8);
  }
  void indices(const std::vector<std::size_t>& v) {
    u64(v.size());
    for (auto i : v) u64(i);
  }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : in_(bytes) {}
  void raw(void* p, std::size_t n) {
    if (n > in_.size() - pos_) throw IoError("model file truncated");
    std::memcpy(p, in_.data() + pos_, n);
    pos_ += n;
  }
  std::uint32_t u32() {
    std::uint32_t v;
    raw(&v, 4);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v;
    raw(&v, 8);
    return v;
  }
  std::int64_t i64() {
    std::int64_t v;
    raw(&v, 8);
    return v;
  }
  double f64() {
    double v;
    raw(&v, 8);
    return v;
  }
  std::uint64_t count(std::size_t elem_size) {
    const std::uint64_t n = u64();
    if (elem_size != 0 && n > (in_.size() - pos_) / elem_size) throw IoError("model file: implausible length");
    return n;
  }
  std::string str() {
    std::string s(count(1), '\0');
    raw(s.data(), s.size());
    return s;
  }
  std::vector<double> f64s() {
    std::vector<double> v(count(8));
    raw(v.data(), v.size() * 8);
    return v;
  }
  std::vector<std::size_t> indices() {
    std::vector<std::size_t> v(count(8));
    for (auto& i : v) i = u64();
    return v;
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

void put_space(Writer& w, const ParamSpace& s) {
  w.u64(s.dims());
  for (const auto& d : s.dim_specs()) {
    w.f64(d.lower);
    w.f64(d.upper);
    w.u32(d.wrapped ? 1 : 0);
  }
  w.u64(s.blocks().size());
  for (const auto& b : s.blocks()) w.indices(b);
}

ParamSpace get_space(Reader& r) {
  std::vector<DimSpec> dims(r.count(20));
  for (auto& d : dims) {
    d.lower = r.f64();
    d.upper = r.f64();
    d.wrapped = r.u32() != 0;
  }
  std::vector<std::vector<std::size_t>> blocks(r.count(8));
  for (auto& b : blocks) b = r.indices();
  return ParamSpace(std::move(dims), std::move(blocks));
}

void put_kde(Writer& w, const Kde& k) {
  put_space(w, k.space());
  w.f64s(k.points());
  w.f64s(k.bandwidth());
}

Kde get_kde(Reader& r) {
  ParamSpace space = get_space(r);
  auto points = r.f64s();
  auto bw = r.f64s();
  return Kde(std::move(space), std::move(points), std::move(bw));
}

void put_estimator(Writer& w, const ClusterModel& m) {
  w.u64(m.feature_dim);
  w.f64s(m.centroids);
  w.u64(m.kdes.size());
  for (const auto& k : m.kdes) put_kde(w, k);
}

void put_estimator(Writer& w, const RegressionForest& f) {
  w.u64(f.feature_dim);
  w.u64(f.trees.size());
  for (const auto& t : f.trees) {
    w.u64(t.nodes.size());
    for (const auto& n : t.nodes) {
      w.i64(n.feature);
      w.f64(n.threshold);
      w.u64(n.left);
      w.u64(n.right);
      w.u64(n.leaf);
      w.u64(n.count);
      w.u64(n.depth);
    }
    w.u64(t.leaves.size());
    for (const auto& k : t.leaves) put_kde(w, k);
  }
}

ClusterModel get_cluster(Reader& r) {
  ClusterModel m;
  m.feature_dim = r.u64();
  m.centroids = r.f64s();
  const auto k = r.count(1);
  for (std::uint64_t i = 0; i < k; ++i) m.kdes.push_back(get_kde(r));
  if (m.feature_dim == 0 || m.centroids.size() != m.kdes.size() * m.feature_dim)
    throw IoError("model file: centroid table does not match cluster count");
  return m;
}

RegressionForest get_forest(Reader& r) {
  RegressionForest f;
  f.feature_dim = r.u64();
  f.trees.resize(r.count(1));
  for (auto& t : f.trees) {
    t.nodes.resize(r.count(56));
    for (auto& n : t.nodes) {
      n.feature = r.i64();
      n.threshold = r.f64();
      n.left = r.u64();
      n.right = r.u64();
      n.leaf = r.u64();
      n.count = r.u64();
      n.depth = r.u64();
    }
    const auto nl = r.count(1);
    for (std::uint64_t i = 0; i < nl; ++i) t.leaves.push_back(get_kde(r));
    for (const auto& n : t.nodes) {
      const bool bad = n.feature >= 0 ? (n.left >= t.nodes.size() || n.right >= t.nodes.size() ||
                                         static_cast<std::uint64_t>(n.feature) >= f.feature_dim)
                                      : n.leaf >= t.leaves.size();
      if (bad) throw IoError("model file: corrupt tree node");
    }
  }
  return f;
}

nlohmann::json sidecar(const ProposalModel& model) {
  nlohmann::json j;
  j["format"] = "informed-proposal-model";
  j["version"] = kVersion;
  j["extractor"] = model.extractor_id;
  j["estimator"] = model.kind == EstimatorKind::kmeans_kde ? "kmeans-kde" : "forest";
  j["param_dims"] = model.space.dims();
  auto& blocks = j["blocks"] = nlohmann::json::array();
  for (const auto& b : model.blocks) {
    nlohmann::json e;
    e["params"] = b.param_indices;
    e["feature_offset"] = b.feature_offset;
    e["feature_length"] = b.feature_length;
    if (const auto* c = std::get_if<ClusterModel>(&b.estimator)) {
      e["clusters"] = c->k();
      std::vector<std::size_t> sizes;
      for (const auto& k : c->kdes) sizes.push_back(k.size());
      e["cluster_sizes"] = sizes;
    } else {
      const auto& f = std::get<RegressionForest>(b.estimator);
      std::vector<std::size_t> leaves, depth;
      for (const auto& t : f.trees) {
        leaves.push_back(t.leaves.size());
        depth.push_back(t.depth());
      }
      e["trees"] = f.trees.size();
      e["leaves"] = leaves;
      e["depth"] = depth;
    }
    blocks.push_back(e);
  }
  return j;
}

}  // namespace

std::vector<std::uint8_t> serialize_proposal_model(const ProposalModel& model) {
  Writer w;
  w.raw(kMagic, sizeof kMagic);
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(model.kind));
  w.str(model.extractor_id);
  put_space(w, model.space);
  w.u64(model.blocks.size());
  for (const auto& b : model.blocks) {
    w.indices(b.param_indices);
    w.u64(b.feature_offset);
    w.u64(b.feature_length);
    std::visit([&](const auto& est) { put_estimator(w, est); }, b.estimator);
  }
  return w.take();
}

ProposalModel deserialize_proposal_model(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  char magic[8];
  r.raw(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof magic) != 0) throw IoError("not a proposal model file (bad magic)");
  const auto version = r.u32();
  if (version != kVersion) throw IoError("unsupported model file version " + std::to_string(version));
  ProposalModel m;
  const auto kind = r.u32();
  if (kind > 1) throw IoError("model file: unknown estimator kind");
  m.kind = static_cast<EstimatorKind>(kind);
  try {
    m.extractor_id = r.str();
    m.space = get_space(r);
    m.blocks.resize(r.count(1));
    for (auto& b : m.blocks) {
      b.param_indices = r.indices();
      b.feature_offset = r.u64();
      b.feature_length = r.u64();
      if (m.kind == EstimatorKind::kmeans_kde) {
        b.estimator = get_cluster(r);
      } else {
        b.estimator = get_forest(r);
      }
    }
  } catch (const ConfigError& e) {
    throw IoError(std::string("model file: ") + e.what());
  }
  if (!r.done()) throw IoError("model file: trailing bytes");
  return m;
}

void write_proposal_model(const ProposalModel& model, const std::string& path) {
  const auto bytes = serialize_proposal_model(model);
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + path);
  }
  std::ofstream side(path + ".json", std::ios::trunc);
  if (!side) throw IoError("cannot open " + path + ".json for writing");
  side << sidecar(model).dump(2) << '\n';
  if (!side) throw IoError("write failed: " + path + ".json");
}

ProposalModel read_proposal_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_proposal_model(bytes);
}

}  // namespace informed
