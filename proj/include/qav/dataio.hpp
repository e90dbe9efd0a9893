#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qav/calib.hpp"
#include "qav/embedding.hpp"
#include "qav/fuse.hpp"
#include "qav/qscore.hpp"

namespace qav {

// Text: a `d n` header line, then `sample_id subject_id v1 ... vd` per
// sample, `-` for a missing subject. Binary: "QMEF", a version byte, then
// little-endian u32 d and n, and per record a u32-length-prefixed
// sample_id, a u32-length-prefixed subject_id (length 0: none) and d f32
// values. Binary stores f32, so only f32-representable values survive a
// round trip exactly.
enum class EmbeddingFormat { text, binary };

inline constexpr char kBinaryMagic[4] = {'Q', 'M', 'E', 'F'};
inline constexpr unsigned char kBinaryVersion = 1;

// Binary for a ".qmef" extension, text otherwise.
EmbeddingFormat format_for_path(const std::filesystem::path& path);

// Sniffs the format from the leading magic bytes. Row numbers in errors
// are 1-based lines (text) or records (binary).
std::vector<Embedding> load_embeddings(const std::filesystem::path& path);
std::vector<Embedding> read_embeddings(std::istream& in);
void write_embeddings(std::ostream& out, std::span<const Embedding> embeddings,
                      EmbeddingFormat format);
void save_embeddings(const std::filesystem::path& path, std::span<const Embedding> embeddings);
void save_embeddings(const std::filesystem::path& path, std::span<const Embedding> embeddings,
                     EmbeddingFormat format);

struct PairRow {
  std::string a;
  std::string b;
  Label label = Label::imposter;

  friend bool operator==(const PairRow&, const PairRow&) = default;
};
using PairProtocol = std::vector<PairRow>;

// Headered CSV `a,b,label`. Throws DuplicatePair when an unordered pair
// appears twice.
PairProtocol read_protocol(std::istream& in);
PairProtocol load_protocol(const std::filesystem::path& path);
void write_protocol(std::ostream& out, const PairProtocol& protocol);
void save_protocol(const std::filesystem::path& path, const PairProtocol& protocol);

// Every unordered pair once, ordered by (sample_id_a, sample_id_b) with the
// smaller id first. Throws MissingSubjectId.
PairProtocol all_pairs(std::span<const Embedding> embeddings);

// Throws UnknownId or DuplicateId.
ComparisonSet build_comparison_set(std::span<const Embedding> embeddings,
                                   const PairProtocol& protocol);

struct ManifestRow {
  std::string template_id;
  std::string sample_id;
};

// Headered CSV `template_id,sample_id`.
std::vector<ManifestRow> load_template_manifest(const std::filesystem::path& path);

// Templates in order of first appearance in the manifest. Throws UnknownId.
std::vector<Template> build_templates(std::span<const Embedding> embeddings,
                                      std::span<const ManifestRow> manifest);

// `key<TAB>value` lines, then `points<TAB>N`, a header row and N rows of
// fmr_target, threshold, omega_opt, fnmr. Doubles use 17 significant
// digits, so a save/load cycle is bit-exact.
std::string format_calibration(const CalibrationResult& result);
CalibrationResult parse_calibration(std::string_view text);
CalibrationResult load_calibration(const std::filesystem::path& path);
void save_calibration(const std::filesystem::path& path, const CalibrationResult& result);

// %.17g
std::string format_double(double x);
double parse_double(std::string_view text, std::size_t row);

std::string read_file(const std::filesystem::path& path);
// Writes a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace qav
