#pragma once

#include "kct/common.hpp"
#include "kct/compare.hpp"
#include "kct/spectral.hpp"
#include "kct/trajectory.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace kct::io {

inline constexpr int kFormatVersion = 1;

// JSON manifest describing an ensemble stored in one or more data files.
// Paths are relative to the manifest's directory unless absolute. A CSV file
// holds one trajectory (rows = time steps, columns = variables, no header);
// a KCT1 binary file holds one or more.
struct EnsembleManifest {
  int format_version = kFormatVersion;
  std::vector<std::string> trajectory_files;
  std::size_t state_dim = 0;
  std::size_t length = 0;
  std::vector<std::string> labels;
  Meta meta;
};

enum class TrajectoryFormat { binary, csv };

EnsembleManifest read_manifest(const std::filesystem::path& manifest_path);
void write_manifest(const EnsembleManifest& manifest, const std::filesystem::path& manifest_path);

TrajectoryEnsemble load_ensemble(const std::filesystem::path& manifest_path);

// Writes the data file(s) next to the manifest and then the manifest itself.
void save_ensemble(const TrajectoryEnsemble& ens, const std::filesystem::path& manifest_path,
                   TrajectoryFormat format = TrajectoryFormat::binary);

// KCT1 binary: magic "KCT1", little-endian u32 state_dim, u32 length,
// u32 trajectory count, then per trajectory the state_dim x length matrix in
// row-major order as little-endian IEEE-754 doubles.
std::string encode_binary(const std::vector<Matrix>& trajectories);
std::vector<Matrix> decode_binary(const std::string& bytes, const std::string& source = "<memory>");
void write_binary_trajectories(const std::filesystem::path& path, const std::vector<Matrix>& trajectories);
std::vector<Matrix> read_binary_trajectories(const std::filesystem::path& path);

// CSV text for one trajectory: rows = time steps, columns = variables.
std::string encode_csv_trajectory(const Matrix& trajectory);
Matrix decode_csv_trajectory(const std::string& text, const std::string& source = "<memory>");
Matrix read_csv_trajectory(const std::filesystem::path& path);

std::string spectrum_to_json(const SpectralDecomposition& dec);
SpectralDecomposition spectrum_from_json(const std::string& text, const std::string& source = "<memory>");
void save_spectrum(const SpectralDecomposition& dec, const std::filesystem::path& path);
SpectralDecomposition load_spectrum(const std::filesystem::path& path);

std::string comparison_to_json(const SpectrumComparison& cmp);
void save_comparison(const SpectrumComparison& cmp, const std::filesystem::path& path);

std::string semi_conjugacy_to_json(const SemiConjugacyResult& result, double tol);

// Labeled CSV grid: a header row and a header column of labels around the
// matrix values. With log10 set, values are log10(max(v, 1e-16)).
std::string encode_matrix_csv(const Matrix& m, const std::vector<std::string>& labels, bool log10);
void export_matrix(const Matrix& m, const std::vector<std::string>& labels, const std::filesystem::path& path,
                   bool log10);

// Writes through a temporary file in the same directory and renames it into
// place, so readers never observe a partial file.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

}  // namespace kct::io
