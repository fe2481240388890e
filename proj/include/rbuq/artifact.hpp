#pragma once

#include <cstring>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "rbuq/config.hpp"
#include "rbuq/mcrb.hpp"
#include "rbuq/sgrb.hpp"

namespace rbuq {

/// Everything the offline phase produces: the configuration echo, the fixed
/// MC sample set and both reduced-order packages. Deterministic model data
/// (mesh, KL expansion, assembled operators, SG basis) is rebuilt from the
/// configuration on load.
struct OfflineArtifact {
  StudyConfig config;
  SampleSet samples;
  McrbRom mcrb;
  SgrbRom sgrb;
};

namespace detail {

inline constexpr char kArtifactMagic[8] = {'R', 'B', 'U', 'Q', 'A', 'R', 'T', '\0'};
inline constexpr std::uint64_t kArtifactVersion = 1;

inline std::uint64_t fnv1a(const char* data, std::size_t n) {
  std::uint64_t h = 1469598103934665603ull;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= static_cast<unsigned char>(data[i]);
    h *= 1099511628211ull;
  }
  return h;
}

class ArtifactWriter {
public:
  void add(const std::string& name, const Matrix& m) { add_raw(name, m.data(), m.rows(), m.cols()); }
  void add(const std::string& name, const Vector& v) { add_raw(name, v.data(), v.size(), 1); }

  void finalize(const std::string& path, nlohmann::json meta) {
    meta["arrays"] = arrays_;
    const std::string manifest = meta.dump();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("artifact: cannot open '" + path + "' for writing");
    out.write(kArtifactMagic, 8);
    const std::uint64_t version = kArtifactVersion;
    out.write(reinterpret_cast<const char*>(&version), 8);
    const std::uint64_t mlen = manifest.size();
    out.write(reinterpret_cast<const char*>(&mlen), 8);
    out.write(manifest.data(), static_cast<std::streamsize>(manifest.size()));
    out.write(data_.data(), static_cast<std::streamsize>(data_.size()));
    if (!out) throw IoError("artifact: write to '" + path + "' failed");
  }

private:
  void add_raw(const std::string& name, const double* p, Index rows, Index cols) {
    const std::size_t bytes = sizeof(double) * static_cast<std::size_t>(rows) *
                              static_cast<std::size_t>(cols);
    nlohmann::json entry;
    entry["rows"] = rows;
    entry["cols"] = cols;
    entry["offset"] = data_.size();
    entry["bytes"] = bytes;
    entry["fnv1a"] = fnv1a(reinterpret_cast<const char*>(p), bytes);
    if (arrays_.contains(name)) throw IoError("artifact: duplicate array '" + name + "'");
    arrays_[name] = entry;
    const std::size_t off = data_.size();
    data_.resize(off + bytes);
    std::memcpy(data_.data() + off, p, bytes);
  }

  nlohmann::json arrays_ = nlohmann::json::object();
  std::vector<char> data_;
};

class ArtifactReader {
public:
  explicit ArtifactReader(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("artifact: cannot open '" + path + "'");
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kArtifactMagic, 8) != 0)
      throw IoError("artifact: '" + path + "' is not an rbuq artifact");
    std::uint64_t version = 0, mlen = 0;
    in.read(reinterpret_cast<char*>(&version), 8);
    if (version != kArtifactVersion)
      throw IoError("artifact: format version " + std::to_string(version) +
                    " is not supported (expected " + std::to_string(kArtifactVersion) + ")");
    in.read(reinterpret_cast<char*>(&mlen), 8);
    std::string manifest(mlen, '\0');
    in.read(manifest.data(), static_cast<std::streamsize>(mlen));
    if (!in) throw IoError("artifact: truncated manifest in '" + path + "'");
    try {
      meta_ = nlohmann::json::parse(manifest);
    } catch (const nlohmann::json::exception& err) {
      throw IoError(std::string("artifact: corrupt manifest: ") + err.what());
    }
    data_.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }

  const nlohmann::json& meta() const { return meta_; }

  Matrix get_matrix(const std::string& name) const {
    const auto& e = entry(name);
    const Index rows = e.at("rows").get<Index>();
    const Index cols = e.at("cols").get<Index>();
    Matrix m(rows, cols);
    copy_checked(name, e, reinterpret_cast<char*>(m.data()));
    return m;
  }

  Vector get_vector(const std::string& name) const {
    const auto& e = entry(name);
    if (e.at("cols").get<Index>() != 1)
      throw IoError("artifact: array '" + name + "' is not a vector");
    Vector v(e.at("rows").get<Index>());
    copy_checked(name, e, reinterpret_cast<char*>(v.data()));
    return v;
  }

private:
  const nlohmann::json& entry(const std::string& name) const {
    const auto& arrays = meta_.at("arrays");
    if (!arrays.contains(name)) throw IoError("artifact: missing array '" + name + "'");
    return arrays.at(name);
  }

  void copy_checked(const std::string& name, const nlohmann::json& e, char* dst) const {
    const std::size_t off = e.at("offset").get<std::size_t>();
    const std::size_t bytes = e.at("bytes").get<std::size_t>();
    if (off + bytes > data_.size()) throw IoError("artifact: array '" + name + "' out of bounds");
    std::memcpy(dst, data_.data() + off, bytes);
    if (fnv1a(dst, bytes) != e.at("fnv1a").get<std::uint64_t>())
      throw IoError("artifact: checksum mismatch in array '" + name + "'");
  }

  nlohmann::json meta_;
  std::vector<char> data_;
};

} // namespace detail

inline void save_artifact(const std::string& path, const OfflineArtifact& art) {
  detail::ArtifactWriter w;
  w.add("samples", art.samples.samples);

  for (int i = 0; i < McrbRom::kNumSpaces; ++i) {
    const std::string p = "mcrb/space" + std::to_string(i) + "/";
    const auto s = static_cast<std::size_t>(i);
    w.add(p + "basis", art.mcrb.bases[s]);
    w.add(p + "singular_values", art.mcrb.singular_values[s]);
    for (std::size_t q = 0; q < art.mcrb.reduced_ops[s].size(); ++q) {
      w.add(p + "op" + std::to_string(q), art.mcrb.reduced_ops[s][q]);
      w.add(p + "product" + std::to_string(q), art.mcrb.full_products[s][q]);
    }
    w.add(p + "reduced_f", art.mcrb.reduced_f[s]);
    w.add(p + "reduced_l", art.mcrb.reduced_l[s]);
  }
  w.add("mcrb/train_points", art.mcrb.train_points);

  for (int i = 0; i < SgrbRom::kNumSpaces; ++i) {
    const std::string p = "sgrb/space" + std::to_string(i) + "/";
    const auto s = static_cast<std::size_t>(i);
    w.add(p + "basis", art.sgrb.bases[s]);
    w.add(p + "singular_values", art.sgrb.singular_values[s]);
    for (int q = 0; q < SgrbRom::kNumTerms; ++q) {
      w.add(p + "op" + std::to_string(q), art.sgrb.reduced_ops[s][static_cast<std::size_t>(q)]);
      w.add(p + "cross" + std::to_string(q), art.sgrb.cross_ops[s][static_cast<std::size_t>(q)]);
    }
    w.add(p + "reduced_f", art.sgrb.reduced_f[s]);
    w.add(p + "reduced_lbar", art.sgrb.reduced_lbar[s]);
    w.add(p + "mode_output", art.sgrb.mode_output[s]);
  }
  w.add("sgrb/train_points", art.sgrb.train_points);

  nlohmann::json meta;
  meta["config"] = config_to_json(art.config);
  meta["sample_seed"] = art.samples.seed;
  meta["mcrb_R_max"] = art.mcrb.R_max;
  meta["mcrb_K"] = art.mcrb.K;
  meta["mcrb_snapshot_xi_count"] = art.mcrb.snapshot_xi_count;
  meta["sgrb_R_max"] = art.sgrb.R_max;
  meta["sgrb_M_FE"] = art.sgrb.M_FE;
  meta["sgrb_M_SG"] = art.sgrb.M_SG;
  w.finalize(path, std::move(meta));
}

inline OfflineArtifact load_artifact(const std::string& path) {
  detail::ArtifactReader r(path);
  OfflineArtifact art;
  art.config = config_from_json(r.meta().at("config"));

  art.samples.samples = r.get_matrix("samples");
  art.samples.seed = r.meta().at("sample_seed").get<std::uint64_t>();
  art.samples.N_xi = static_cast<int>(art.samples.samples.rows());
  art.samples.K = static_cast<int>(art.samples.samples.cols());

  art.mcrb.K = r.meta().at("mcrb_K").get<int>();
  art.mcrb.R_max = r.meta().at("mcrb_R_max").get<int>();
  art.mcrb.snapshot_xi_count = r.meta().at("mcrb_snapshot_xi_count").get<int>();
  art.mcrb.train_points = r.get_matrix("mcrb/train_points");
  for (int i = 0; i < McrbRom::kNumSpaces; ++i) {
    const std::string p = "mcrb/space" + std::to_string(i) + "/";
    const auto s = static_cast<std::size_t>(i);
    art.mcrb.bases[s] = r.get_matrix(p + "basis");
    art.mcrb.singular_values[s] = r.get_vector(p + "singular_values");
    const int nq = art.mcrb.K + 3;
    art.mcrb.reduced_ops[s].resize(static_cast<std::size_t>(nq));
    art.mcrb.full_products[s].resize(static_cast<std::size_t>(nq));
    for (int q = 0; q < nq; ++q) {
      art.mcrb.reduced_ops[s][static_cast<std::size_t>(q)] = r.get_matrix(p + "op" + std::to_string(q));
      art.mcrb.full_products[s][static_cast<std::size_t>(q)] =
          r.get_matrix(p + "product" + std::to_string(q));
    }
    art.mcrb.reduced_f[s] = r.get_vector(p + "reduced_f");
    art.mcrb.reduced_l[s] = r.get_vector(p + "reduced_l");
  }

  art.sgrb.R_max = r.meta().at("sgrb_R_max").get<int>();
  art.sgrb.M_FE = r.meta().at("sgrb_M_FE").get<int>();
  art.sgrb.M_SG = r.meta().at("sgrb_M_SG").get<int>();
  art.sgrb.train_points = r.get_matrix("sgrb/train_points");
  for (int i = 0; i < SgrbRom::kNumSpaces; ++i) {
    const std::string p = "sgrb/space" + std::to_string(i) + "/";
    const auto s = static_cast<std::size_t>(i);
    art.sgrb.bases[s] = r.get_matrix(p + "basis");
    art.sgrb.singular_values[s] = r.get_vector(p + "singular_values");
    for (int q = 0; q < SgrbRom::kNumTerms; ++q) {
      art.sgrb.reduced_ops[s][static_cast<std::size_t>(q)] = r.get_matrix(p + "op" + std::to_string(q));
      art.sgrb.cross_ops[s][static_cast<std::size_t>(q)] =
          r.get_matrix(p + "cross" + std::to_string(q));
    }
    art.sgrb.reduced_f[s] = r.get_vector(p + "reduced_f");
    art.sgrb.reduced_lbar[s] = r.get_vector(p + "reduced_lbar");
    art.sgrb.mode_output[s] = r.get_matrix(p + "mode_output");
  }
  return art;
}

} // namespace rbuq
