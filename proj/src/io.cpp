#include "kct/io.hpp"

#include <json.hpp>

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>

#include <unistd.h>

namespace kct::io {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

void write_file_atomic(const fs::path& path, const std::string& content) {
  const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      fs::remove(tmp, ec);
      throw IoError("failed writing " + tmp.string());
    }
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move " + tmp.string() + " to " + path.string());
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// binary trajectories

namespace {

constexpr char kMagic[4] = {'K', 'C', 'T', '1'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

void put_f64(std::string& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xffu));
}

std::uint64_t get_le(const std::string& bytes, std::size_t offset, int width) {
  std::uint64_t v = 0;
  for (int i = 0; i < width; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[offset + static_cast<std::size_t>(i)])) << (8 * i);
  }
  return v;
}

std::uint32_t checked_u32(std::size_t v, const char* what) {
  if (v > 0xffffffffu) throw DataError(std::string(what) + " does not fit the binary format");
  return static_cast<std::uint32_t>(v);
}

}  // namespace

std::string encode_binary(const std::vector<Matrix>& trajectories) {
  if (trajectories.empty()) throw DataError("nothing to encode: no trajectories");
  const auto rows = static_cast<std::size_t>(trajectories.front().rows());
  const auto cols = static_cast<std::size_t>(trajectories.front().cols());
  std::string out(kMagic, 4);
  put_u32(out, checked_u32(rows, "state_dim"));
  put_u32(out, checked_u32(cols, "length"));
  put_u32(out, checked_u32(trajectories.size(), "trajectory count"));
  out.reserve(out.size() + trajectories.size() * rows * cols * 8);
  for (const Matrix& m : trajectories) {
    if (static_cast<std::size_t>(m.rows()) != rows || static_cast<std::size_t>(m.cols()) != cols) {
      throw DataError("binary encoding needs equally shaped trajectories");
    }
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) put_f64(out, m(r, c));
    }
  }
  return out;
}

std::vector<Matrix> decode_binary(const std::string& bytes, const std::string& source) {
  if (bytes.size() < 16 || bytes.compare(0, 4, kMagic, 4) != 0) {
    throw DataError(source + ": not a KCT1 trajectory file");
  }
  const auto rows = static_cast<std::size_t>(get_le(bytes, 4, 4));
  const auto cols = static_cast<std::size_t>(get_le(bytes, 8, 4));
  const auto count = static_cast<std::size_t>(get_le(bytes, 12, 4));
  const std::size_t expected = 16 + rows * cols * count * 8;
  if (bytes.size() != expected) {
    throw DataError(source + ": header declares " + std::to_string(count) + " trajectories of " +
                    std::to_string(rows) + "x" + std::to_string(cols) + " (" + std::to_string(expected) +
                    " bytes), file has " + std::to_string(bytes.size()) + " bytes");
  }
  std::vector<Matrix> out;
  out.reserve(count);
  std::size_t offset = 16;
  for (std::size_t k = 0; k < count; ++k) {
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        const double v = std::bit_cast<double>(get_le(bytes, offset, 8));
        offset += 8;
        if (!std::isfinite(v)) {
          throw DataError(source + ": non-finite value in trajectory " + std::to_string(k) + ", variable " +
                          std::to_string(r) + ", step " + std::to_string(c));
        }
        m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
      }
    }
    out.push_back(std::move(m));
  }
  return out;
}

void write_binary_trajectories(const fs::path& path, const std::vector<Matrix>& trajectories) {
  write_file_atomic(path, encode_binary(trajectories));
}

std::vector<Matrix> read_binary_trajectories(const fs::path& path) {
  return decode_binary(read_file(path), path.string());
}

// ---------------------------------------------------------------------------
// CSV trajectories

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

std::string encode_csv_trajectory(const Matrix& trajectory) {
  std::string out;
  for (Eigen::Index t = 0; t < trajectory.cols(); ++t) {
    for (Eigen::Index v = 0; v < trajectory.rows(); ++v) {
      if (v) out += ',';
      out += format_double(trajectory(v, t));
    }
    out += '\n';
  }
  return out;
}

Matrix decode_csv_trajectory(const std::string& text, const std::string& source) {
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string_view line = trim(std::string_view(text).substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> row;
    std::size_t col = 0;
    while (true) {
      const std::size_t comma = line.find(',');
      const std::string_view field = trim(line.substr(0, comma));
      double v = 0.0;
      const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
      if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
        throw DataError(source + ": cannot parse '" + std::string(field) + "' at row " + std::to_string(line_no) +
                        ", column " + std::to_string(col + 1));
      }
      if (!std::isfinite(v)) {
        throw DataError(source + ": non-finite value at row " + std::to_string(line_no) + ", column " +
                        std::to_string(col + 1));
      }
      row.push_back(v);
      ++col;
      if (comma == std::string_view::npos) break;
      line.remove_prefix(comma + 1);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw DataError(source + ": row " + std::to_string(line_no) + " has " + std::to_string(row.size()) +
                      " columns, expected " + std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError(source + ": no data rows");
  Matrix m(static_cast<Eigen::Index>(rows.front().size()), static_cast<Eigen::Index>(rows.size()));
  for (std::size_t t = 0; t < rows.size(); ++t) {
    for (std::size_t v = 0; v < rows[t].size(); ++v) {
      m(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(t)) = rows[t][v];
    }
  }
  return m;
}

Matrix read_csv_trajectory(const fs::path& path) { return decode_csv_trajectory(read_file(path), path.string()); }

// ---------------------------------------------------------------------------
// JSON helpers

namespace {

const Json& field(const Json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw DataError("schema violation at " + path + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw DataError("schema violation at " + path + "/" + key + ": missing field");
  return *it;
}

double as_number(const Json& v, const std::string& path) {
  if (!v.is_number()) throw DataError("schema violation at " + path + ": expected a number");
  return v.get<double>();
}

std::int64_t as_integer(const Json& v, const std::string& path) {
  if (!v.is_number_integer()) throw DataError("schema violation at " + path + ": expected an integer");
  return v.get<std::int64_t>();
}

std::size_t as_count(const Json& v, const std::string& path) {
  const std::int64_t n = as_integer(v, path);
  if (n < 0) throw DataError("schema violation at " + path + ": expected a non-negative integer");
  return static_cast<std::size_t>(n);
}

const Json& as_array(const Json& v, const std::string& path) {
  if (!v.is_array()) throw DataError("schema violation at " + path + ": expected an array");
  return v;
}

Json complex_json(const Complex& c) {
  Json j = Json::object();
  j["re"] = c.real();
  j["im"] = c.imag();
  return j;
}

Complex complex_from(const Json& v, const std::string& path) {
  return {as_number(field(v, "re", path), path + "/re"), as_number(field(v, "im", path), path + "/im")};
}

Json meta_json(const Meta& meta) {
  Json j = Json::object();
  for (const auto& [k, v] : meta) j[k] = v;
  return j;
}

Meta meta_from(const Json& v, const std::string& path) {
  if (!v.is_object()) throw DataError("schema violation at " + path + ": expected an object");
  Meta meta;
  for (const auto& [k, item] : v.items()) {
    if (!item.is_string()) throw DataError("schema violation at " + path + "/" + k + ": expected a string");
    meta[k] = item.get<std::string>();
  }
  return meta;
}

void check_version(const Json& doc, const std::string& source) {
  const std::int64_t version = as_integer(field(doc, "format_version", ""), "/format_version");
  if (version != kFormatVersion) {
    throw DataError(source + ": unknown format_version " + std::to_string(version) + " (supported: " +
                    std::to_string(kFormatVersion) + ")");
  }
}

Json parse_json(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw DataError(source + ": invalid JSON: " + e.what());
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// manifests

EnsembleManifest read_manifest(const fs::path& manifest_path) {
  const std::string source = manifest_path.string();
  const Json doc = parse_json(read_file(manifest_path), source);
  try {
    check_version(doc, source);
    EnsembleManifest m;
    const Json& files = as_array(field(doc, "trajectory_files", ""), "/trajectory_files");
    for (std::size_t i = 0; i < files.size(); ++i) {
      if (!files[i].is_string()) {
        throw DataError("schema violation at /trajectory_files/" + std::to_string(i) + ": expected a string");
      }
      m.trajectory_files.push_back(files[i].get<std::string>());
    }
    if (m.trajectory_files.empty()) throw DataError("schema violation at /trajectory_files: list is empty");
    m.state_dim = as_count(field(doc, "state_dim", ""), "/state_dim");
    m.length = as_count(field(doc, "length", ""), "/length");
    if (doc.contains("labels")) {
      const Json& labels = as_array(doc["labels"], "/labels");
      for (std::size_t i = 0; i < labels.size(); ++i) {
        if (!labels[i].is_string()) {
          throw DataError("schema violation at /labels/" + std::to_string(i) + ": expected a string");
        }
        m.labels.push_back(labels[i].get<std::string>());
      }
    }
    if (doc.contains("meta")) m.meta = meta_from(doc["meta"], "/meta");
    return m;
  } catch (const DataError& e) {
    throw DataError(source + ": " + e.what());
  }
}

void write_manifest(const EnsembleManifest& manifest, const fs::path& manifest_path) {
  Json doc = Json::object();
  doc["format_version"] = manifest.format_version;
  doc["trajectory_files"] = manifest.trajectory_files;
  doc["state_dim"] = manifest.state_dim;
  doc["length"] = manifest.length;
  doc["labels"] = manifest.labels;
  doc["meta"] = meta_json(manifest.meta);
  write_file_atomic(manifest_path, doc.dump(2) + "\n");
}

TrajectoryEnsemble load_ensemble(const fs::path& manifest_path) {
  const EnsembleManifest m = read_manifest(manifest_path);
  const fs::path base = manifest_path.has_parent_path() ? manifest_path.parent_path() : fs::path(".");
  std::vector<Matrix> trajectories;
  for (const std::string& name : m.trajectory_files) {
    fs::path file(name);
    if (file.is_relative()) file = base / file;
    std::vector<Matrix> parts;
    if (file.extension() == ".csv") {
      parts.push_back(read_csv_trajectory(file));
    } else {
      parts = read_binary_trajectories(file);
    }
    for (Matrix& p : parts) {
      if (static_cast<std::size_t>(p.rows()) != m.state_dim || static_cast<std::size_t>(p.cols()) != m.length) {
        throw DataError(file.string() + ": dimension mismatch, manifest declares state_dim " +
                        std::to_string(m.state_dim) + " x length " + std::to_string(m.length) + ", file holds " +
                        std::to_string(p.rows()) + " x " + std::to_string(p.cols()));
      }
      trajectories.push_back(std::move(p));
    }
  }
  return TrajectoryEnsemble(std::move(trajectories), m.labels, m.meta);
}

void save_ensemble(const TrajectoryEnsemble& ens, const fs::path& manifest_path, TrajectoryFormat format) {
  EnsembleManifest m;
  m.state_dim = ens.state_dim();
  m.length = ens.length();
  m.labels = ens.labels();
  m.meta = ens.meta();
  const fs::path base = manifest_path.has_parent_path() ? manifest_path.parent_path() : fs::path(".");
  const std::string stem = manifest_path.stem().string();
  if (format == TrajectoryFormat::binary) {
    const std::string name = stem + ".bin";
    write_binary_trajectories(base / name, ens.trajectories());
    m.trajectory_files.push_back(name);
  } else {
    for (std::size_t i = 0; i < ens.size(); ++i) {
      const std::string name = stem + "_" + std::to_string(i) + ".csv";
      write_file_atomic(base / name, encode_csv_trajectory(ens.trajectory(i)));
      m.trajectory_files.push_back(name);
    }
  }
  write_manifest(m, manifest_path);
}

// ---------------------------------------------------------------------------
// spectra

std::string spectrum_to_json(const SpectralDecomposition& dec) {
  Json doc = Json::object();
  doc["format_version"] = kFormatVersion;
  Json eig = Json::array();
  for (const Complex& l : dec.eigenvalues) eig.push_back(complex_json(l));
  doc["eigenvalues"] = std::move(eig);
  doc["residuals"] = dec.residuals;
  doc["rank"] = dec.rank;
  doc["delay"] = dec.delay;
  doc["window"] = {dec.window[0], dec.window[1]};
  Json amps = Json::array();
  for (const auto& set : dec.amplitudes) {
    Json row = Json::array();
    for (const Complex& a : set) row.push_back(complex_json(a));
    amps.push_back(std::move(row));
  }
  doc["amplitudes"] = std::move(amps);
  doc["embed_dim"] = dec.embed_dim();
  Json modes = Json::array();
  for (Eigen::Index c = 0; c < dec.modes.cols(); ++c) {
    Json col = Json::array();
    for (Eigen::Index r = 0; r < dec.modes.rows(); ++r) col.push_back(complex_json(dec.modes(r, c)));
    modes.push_back(std::move(col));
  }
  doc["modes"] = std::move(modes);
  doc["meta"] = meta_json(dec.meta);
  return doc.dump() + "\n";
}

SpectralDecomposition spectrum_from_json(const std::string& text, const std::string& source) {
  const Json doc = parse_json(text, source);
  try {
    check_version(doc, source);
    SpectralDecomposition dec;
    const Json& eig = as_array(field(doc, "eigenvalues", ""), "/eigenvalues");
    for (std::size_t i = 0; i < eig.size(); ++i) {
      dec.eigenvalues.push_back(complex_from(eig[i], "/eigenvalues/" + std::to_string(i)));
    }
    const Json& res = as_array(field(doc, "residuals", ""), "/residuals");
    for (std::size_t i = 0; i < res.size(); ++i) {
      dec.residuals.push_back(as_number(res[i], "/residuals/" + std::to_string(i)));
    }
    if (dec.residuals.size() != dec.eigenvalues.size()) {
      throw DataError("schema violation at /residuals: expected " + std::to_string(dec.eigenvalues.size()) +
                      " entries");
    }
    dec.rank = as_count(field(doc, "rank", ""), "/rank");
    dec.delay = as_count(field(doc, "delay", ""), "/delay");
    const Json& win = as_array(field(doc, "window", ""), "/window");
    if (win.size() != 2) throw DataError("schema violation at /window: expected [t1, t2]");
    dec.window = {as_integer(win[0], "/window/0"), as_integer(win[1], "/window/1")};
    const Json& amps = as_array(field(doc, "amplitudes", ""), "/amplitudes");
    for (std::size_t j = 0; j < amps.size(); ++j) {
      const std::string p = "/amplitudes/" + std::to_string(j);
      const Json& row = as_array(amps[j], p);
      std::vector<Complex> set;
      for (std::size_t i = 0; i < row.size(); ++i) set.push_back(complex_from(row[i], p + "/" + std::to_string(i)));
      if (set.size() != dec.eigenvalues.size()) {
        throw DataError("schema violation at " + p + ": expected " + std::to_string(dec.eigenvalues.size()) +
                        " entries");
      }
      dec.amplitudes.push_back(std::move(set));
    }
    const auto n = static_cast<Eigen::Index>(dec.eigenvalues.size());
    const auto embed = static_cast<Eigen::Index>(as_count(field(doc, "embed_dim", ""), "/embed_dim"));
    dec.modes.resize(embed, n);
    const Json& modes = as_array(field(doc, "modes", ""), "/modes");
    if (static_cast<Eigen::Index>(modes.size()) != n) {
      throw DataError("schema violation at /modes: expected " + std::to_string(n) + " columns");
    }
    for (Eigen::Index c = 0; c < n; ++c) {
      const std::string p = "/modes/" + std::to_string(c);
      const Json& col = as_array(modes[static_cast<std::size_t>(c)], p);
      if (static_cast<Eigen::Index>(col.size()) != embed) {
        throw DataError("schema violation at " + p + ": expected " + std::to_string(embed) + " entries");
      }
      for (Eigen::Index r = 0; r < embed; ++r) {
        dec.modes(r, c) = complex_from(col[static_cast<std::size_t>(r)], p + "/" + std::to_string(r));
      }
    }
    if (doc.contains("meta")) dec.meta = meta_from(doc["meta"], "/meta");
    return dec;
  } catch (const DataError& e) {
    throw DataError(source + ": " + e.what());
  }
}

void save_spectrum(const SpectralDecomposition& dec, const fs::path& path) {
  write_file_atomic(path, spectrum_to_json(dec));
}

SpectralDecomposition load_spectrum(const fs::path& path) {
  return spectrum_from_json(read_file(path), path.string());
}

// ---------------------------------------------------------------------------
// comparisons and matrices

std::string comparison_to_json(const SpectrumComparison& cmp) {
  Json doc = Json::object();
  doc["format_version"] = kFormatVersion;
  doc["distance"] = cmp.distance;
  doc["assignment"] = cmp.assignment;
  if (cmp.shuffle) {
    Json s = Json::object();
    s["n_shuff"] = cmp.shuffle->n_shuff;
    s["seed"] = cmp.shuffle->seed;
    s["frac_ge"] = cmp.shuffle->frac_ge;
    s["distances"] = cmp.shuffle->distances;
    doc["shuffle"] = std::move(s);
  }
  doc["meta"] = meta_json(cmp.meta);
  return doc.dump(2) + "\n";
}

void save_comparison(const SpectrumComparison& cmp, const fs::path& path) {
  write_file_atomic(path, comparison_to_json(cmp));
}

std::string semi_conjugacy_to_json(const SemiConjugacyResult& result, double tol) {
  Json doc = Json::object();
  doc["format_version"] = kFormatVersion;
  doc["subset"] = result.subset;
  doc["tol"] = tol;
  doc["max_residual"] = result.max_residual;
  Json pairs = Json::array();
  for (const auto& [s, b] : result.matched_pairs) pairs.push_back({s, b});
  doc["matched_pairs"] = std::move(pairs);
  return doc.dump(2) + "\n";
}

std::string encode_matrix_csv(const Matrix& m, const std::vector<std::string>& labels, bool log10) {
  if (m.rows() != m.cols() || static_cast<std::size_t>(m.rows()) != labels.size()) {
    throw DataError("matrix export needs a square matrix with one label per row");
  }
  const Matrix values = log10 ? clamped_log10(m) : m;
  if (!values.allFinite()) throw DataError("matrix export: values are not finite");
  std::string out;
  for (const std::string& l : labels) out += "," + l;
  out += '\n';
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    out += labels[static_cast<std::size_t>(r)];
    for (Eigen::Index c = 0; c < values.cols(); ++c) out += "," + format_double(values(r, c));
    out += '\n';
  }
  return out;
}

void export_matrix(const Matrix& m, const std::vector<std::string>& labels, const fs::path& path, bool log10) {
  write_file_atomic(path, encode_matrix_csv(m, labels, log10));
}

}  // namespace kct::io
