#include "qav/dataio.hpp"

#include <unistd.h>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "qav/error.hpp"

namespace qav {

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

std::string_view strip_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

std::size_t parse_count(std::string_view text, std::size_t row) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::parse, "expected a non-negative integer, got '" + std::string(text) + "'", row);
  }
  return v;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open '" + path.string() + "'");
  return in;
}

void check_vector(const Embedding& e, std::size_t row) {
  for (double x : e.vector) {
    if (!std::isfinite(x)) {
      throw Error(ErrorCode::non_finite, "sample '" + e.sample_id + "' has a non-finite component", row);
    }
  }
  if (l2_norm(e.vector) < kZeroNormTolerance) {
    throw Error(ErrorCode::zero_norm, "sample '" + e.sample_id + "' has zero norm", row);
  }
}

void check_id(std::string_view id, const char* what) {
  if (id.empty() || id.find_first_of(" \t\r\n,") != std::string_view::npos) {
    throw Error(ErrorCode::invalid_argument,
                std::string(what) + " '" + std::string(id) + "' is empty or contains whitespace or commas");
  }
}

std::vector<Embedding> read_text(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::parse, "missing `d n` header", 1);
  const auto header = split_ws(strip_cr(line));
  if (header.size() != 2) throw Error(ErrorCode::parse, "header must be `d n`", 1);
  const std::size_t d = parse_count(header[0], 1);
  const std::size_t n = parse_count(header[1], 1);
  if (d == 0) throw Error(ErrorCode::parse, "dimension must be positive", 1);

  std::vector<Embedding> out;
  out.reserve(n);
  std::set<std::string, std::less<>> seen;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    const auto fields = split_ws(strip_cr(line));
    if (fields.empty()) continue;
    if (fields.size() != d + 2) {
      if (fields.size() < 2) throw Error(ErrorCode::parse, "expected sample_id subject_id v1..vd", row);
      throw Error(ErrorCode::dimension_mismatch,
                  "row has " + std::to_string(fields.size() - 2) + " values, expected " + std::to_string(d), row);
    }
    Embedding e;
    e.sample_id = std::string(fields[0]);
    if (fields[1] != "-") e.subject_id = std::string(fields[1]);
    e.vector.resize(d);
    for (std::size_t k = 0; k < d; ++k) e.vector[k] = parse_double(fields[k + 2], row);
    check_vector(e, row);
    if (!seen.insert(e.sample_id).second) {
      throw Error(ErrorCode::duplicate_id, "sample id '" + e.sample_id + "' appears twice", row);
    }
    out.push_back(std::move(e));
  }
  if (out.size() != n) {
    throw Error(ErrorCode::parse, "header announces " + std::to_string(n) + " samples, file has " +
                                      std::to_string(out.size()));
  }
  return out;
}

std::uint32_t read_u32(std::istream& in, std::size_t row) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw Error(ErrorCode::parse, "truncated binary file", row);
  return std::uint32_t{b[0]} | std::uint32_t{b[1]} << 8 | std::uint32_t{b[2]} << 16 |
         std::uint32_t{b[3]} << 24;
}

void write_u32(std::ostream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                     static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(b, 4);
}

std::string read_string(std::istream& in, std::size_t row) {
  const std::uint32_t len = read_u32(in, row);
  std::string s(len, '\0');
  if (len && !in.read(s.data(), len)) throw Error(ErrorCode::parse, "truncated binary file", row);
  return s;
}

void write_string(std::ostream& out, std::string_view s) {
  write_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::vector<Embedding> read_binary(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || !std::equal(magic, magic + 4, kBinaryMagic)) {
    throw Error(ErrorCode::parse, "missing QMEF magic");
  }
  const int version = in.get();
  if (version != kBinaryVersion) {
    throw Error(ErrorCode::parse, "unsupported binary version " + std::to_string(version));
  }
  const std::size_t d = read_u32(in, 0);
  const std::size_t n = read_u32(in, 0);
  if (d == 0) throw Error(ErrorCode::parse, "dimension must be positive");

  std::vector<Embedding> out;
  out.reserve(n);
  std::set<std::string, std::less<>> seen;
  for (std::size_t r = 1; r <= n; ++r) {
    Embedding e;
    e.sample_id = read_string(in, r);
    auto subject = read_string(in, r);
    if (!subject.empty()) e.subject_id = std::move(subject);
    e.vector.resize(d);
    for (std::size_t k = 0; k < d; ++k) {
      e.vector[k] = static_cast<double>(std::bit_cast<float>(read_u32(in, r)));
    }
    if (e.sample_id.empty()) throw Error(ErrorCode::parse, "empty sample id", r);
    check_vector(e, r);
    if (!seen.insert(e.sample_id).second) {
      throw Error(ErrorCode::duplicate_id, "sample id '" + e.sample_id + "' appears twice", r);
    }
    out.push_back(std::move(e));
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw Error(ErrorCode::parse, "trailing bytes after " + std::to_string(n) + " records");
  }
  return out;
}

std::string unordered_key(std::string_view a, std::string_view b) {
  if (b < a) std::swap(a, b);
  std::string key;
  key.reserve(a.size() + b.size() + 1);
  key.append(a).push_back('\n');
  key.append(b);
  return key;
}

}  // namespace

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double parse_double(std::string_view text, std::size_t row) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::parse, "expected a number, got '" + std::string(text) + "'", row);
  }
  return v;
}

std::string read_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io, "cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::io, "write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::io, "cannot rename into '" + path.string() + "'");
  }
}

EmbeddingFormat format_for_path(const std::filesystem::path& path) {
  return path.extension() == ".qmef" ? EmbeddingFormat::binary : EmbeddingFormat::text;
}

std::vector<Embedding> read_embeddings(std::istream& in) {
  if (in.peek() == kBinaryMagic[0]) {
    char head[4] = {};
    in.read(head, 4);
    const bool binary = in.gcount() == 4 && std::equal(head, head + 4, kBinaryMagic);
    in.clear();
    in.seekg(-in.gcount(), std::ios::cur);
    if (binary) return read_binary(in);
  }
  return read_text(in);
}

std::vector<Embedding> load_embeddings(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_embeddings(in);
}

void write_embeddings(std::ostream& out, std::span<const Embedding> embeddings,
                      EmbeddingFormat format) {
  const std::size_t d = embeddings.empty() ? 0 : embeddings.front().dim();
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    const auto& e = embeddings[i];
    if (e.dim() != d || d == 0) {
      throw Error(ErrorCode::dimension_mismatch, "embeddings must share one positive dimension", i);
    }
    check_id(e.sample_id, "sample id");
    if (e.subject_id) {
      check_id(*e.subject_id, "subject id");
      if (*e.subject_id == "-") throw Error(ErrorCode::invalid_argument, "subject id '-' is reserved", i);
    }
  }

  if (format == EmbeddingFormat::binary) {
    out.write(kBinaryMagic, 4);
    out.put(static_cast<char>(kBinaryVersion));
    write_u32(out, static_cast<std::uint32_t>(d));
    write_u32(out, static_cast<std::uint32_t>(embeddings.size()));
    for (const auto& e : embeddings) {
      write_string(out, e.sample_id);
      write_string(out, e.subject_id.value_or(""));
      for (double x : e.vector) write_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(x)));
    }
    return;
  }

  out << d << ' ' << embeddings.size() << '\n';
  for (const auto& e : embeddings) {
    out << e.sample_id << ' ' << e.subject_id.value_or("-");
    for (double x : e.vector) out << ' ' << format_double(x);
    out << '\n';
  }
}

void save_embeddings(const std::filesystem::path& path, std::span<const Embedding> embeddings,
                     EmbeddingFormat format) {
  std::ostringstream ss;
  write_embeddings(ss, embeddings, format);
  write_file_atomic(path, ss.view());
}

void save_embeddings(const std::filesystem::path& path, std::span<const Embedding> embeddings) {
  save_embeddings(path, embeddings, format_for_path(path));
}

PairProtocol read_protocol(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || strip_cr(line) != "a,b,label") {
    throw Error(ErrorCode::parse, "protocol header must be `a,b,label`", 1);
  }
  PairProtocol out;
  std::set<std::string, std::less<>> seen;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    const auto text = strip_cr(line);
    if (text.empty()) continue;
    const auto f = split(text, ',');
    if (f.size() != 3 || f[0].empty() || f[1].empty()) {
      throw Error(ErrorCode::parse, "expected `a,b,label`", row);
    }
    Label label;
    try {
      label = parse_label(f[2]);
    } catch (const Error& e) {
      throw Error(ErrorCode::parse, e.what(), row);
    }
    if (!seen.insert(unordered_key(f[0], f[1])).second) {
      throw Error(ErrorCode::duplicate_pair,
                  "pair (" + std::string(f[0]) + ", " + std::string(f[1]) + ") appears twice", row);
    }
    out.push_back({std::string(f[0]), std::string(f[1]), label});
  }
  return out;
}

PairProtocol load_protocol(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_protocol(in);
}

void write_protocol(std::ostream& out, const PairProtocol& protocol) {
  out << "a,b,label\n";
  for (const auto& r : protocol) out << r.a << ',' << r.b << ',' << to_string(r.label) << '\n';
}

void save_protocol(const std::filesystem::path& path, const PairProtocol& protocol) {
  std::ostringstream ss;
  write_protocol(ss, protocol);
  write_file_atomic(path, ss.view());
}

PairProtocol all_pairs(std::span<const Embedding> embeddings) {
  std::vector<const Embedding*> sorted;
  sorted.reserve(embeddings.size());
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    if (!embeddings[i].subject_id) {
      throw Error(ErrorCode::missing_subject_id,
                  "sample '" + embeddings[i].sample_id + "' has no subject id", i);
    }
    sorted.push_back(&embeddings[i]);
  }
  std::sort(sorted.begin(), sorted.end(),
            [](const Embedding* x, const Embedding* y) { return x->sample_id < y->sample_id; });

  PairProtocol out;
  out.reserve(sorted.size() * (sorted.size() - (sorted.empty() ? 0 : 1)) / 2);
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    for (std::size_t j = i + 1; j < sorted.size(); ++j) {
      const bool same = *sorted[i]->subject_id == *sorted[j]->subject_id;
      out.push_back({sorted[i]->sample_id, sorted[j]->sample_id, same ? Label::genuine : Label::imposter});
    }
  }
  return out;
}

ComparisonSet build_comparison_set(std::span<const Embedding> embeddings,
                                   const PairProtocol& protocol) {
  std::unordered_map<std::string_view, std::size_t> index;
  std::vector<double> quality(embeddings.size());
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    if (!index.emplace(embeddings[i].sample_id, i).second) {
      throw Error(ErrorCode::duplicate_id, "sample id '" + embeddings[i].sample_id + "' appears twice", i);
    }
    validate(embeddings[i]);
    quality[i] = l2_norm(embeddings[i].vector);
  }
  const auto lookup = [&](const std::string& id, std::size_t row) {
    const auto it = index.find(id);
    if (it == index.end()) throw Error(ErrorCode::unknown_id, "unknown sample id '" + id + "'", row);
    return it->second;
  };

  std::vector<ScoredPair> pairs;
  pairs.reserve(protocol.size());
  for (std::size_t r = 0; r < protocol.size(); ++r) {
    const auto& row = protocol[r];
    const std::size_t a = lookup(row.a, r);
    const std::size_t b = lookup(row.b, r);
    pairs.push_back({cosine(embeddings[a], embeddings[b]), std::min(quality[a], quality[b]),
                     row.label, row.a, row.b});
  }
  return ComparisonSet(std::move(pairs));
}

std::vector<ManifestRow> load_template_manifest(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::string line;
  if (!std::getline(in, line) || strip_cr(line) != "template_id,sample_id") {
    throw Error(ErrorCode::parse, "manifest header must be `template_id,sample_id`", 1);
  }
  std::vector<ManifestRow> out;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    const auto text = strip_cr(line);
    if (text.empty()) continue;
    const auto f = split(text, ',');
    if (f.size() != 2 || f[0].empty() || f[1].empty()) {
      throw Error(ErrorCode::parse, "expected `template_id,sample_id`", row);
    }
    out.push_back({std::string(f[0]), std::string(f[1])});
  }
  return out;
}

std::vector<Template> build_templates(std::span<const Embedding> embeddings,
                                      std::span<const ManifestRow> manifest) {
  std::unordered_map<std::string_view, std::size_t> index;
  for (std::size_t i = 0; i < embeddings.size(); ++i) index.emplace(embeddings[i].sample_id, i);

  std::vector<Template> out;
  std::unordered_map<std::string, std::size_t> slot;
  for (std::size_t r = 0; r < manifest.size(); ++r) {
    const auto it = index.find(manifest[r].sample_id);
    if (it == index.end()) {
      throw Error(ErrorCode::unknown_id, "unknown sample id '" + manifest[r].sample_id + "'", r);
    }
    const auto [s, fresh] = slot.emplace(manifest[r].template_id, out.size());
    if (fresh) out.push_back({{}, manifest[r].template_id});
    out[s->second].frames.push_back(decompose(embeddings[it->second]));
  }
  return out;
}

std::string format_calibration(const CalibrationResult& r) {
  std::string s;
  const auto kv = [&](std::string_view key, const std::string& value) {
    s.append(key).append("\t").append(value).append("\n");
  };
  kv("alpha", format_double(r.params.alpha));
  kv("beta", format_double(r.params.beta));
  kv("fit_r2", format_double(r.fit_r2));
  kv("mean_t", format_double(r.mean_t));
  kv("mean_omega", format_double(r.mean_omega));
  kv("use_sigmoid", r.use_sigmoid ? "true" : "false");
  for (const auto& w : r.warnings) kv("warning", w);
  kv("points", std::to_string(r.points.size()));
  s += "fmr_target\tthreshold\tomega_opt\tfnmr\n";
  for (const auto& p : r.points) {
    s += format_double(p.fmr_target) + '\t' + format_double(p.threshold) + '\t' +
         format_double(p.omega_opt) + '\t' + format_double(p.fnmr) + '\n';
  }
  return s;
}

CalibrationResult parse_calibration(std::string_view text) {
  CalibrationResult r;
  std::map<std::string, bool, std::less<>> required = {
      {"alpha", false}, {"beta", false}, {"fit_r2", false}, {"points", false}};
  std::size_t row = 0;
  std::size_t pos = 0;
  const auto next_line = [&](std::string_view& line) {
    if (pos >= text.size()) return false;
    const auto end = text.find('\n', pos);
    line = strip_cr(text.substr(pos, end - pos));
    pos = end == std::string_view::npos ? text.size() : end + 1;
    ++row;
    return true;
  };

  std::string_view line;
  std::size_t n_points = 0;
  bool in_table = false;
  while (!in_table && next_line(line)) {
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos) throw Error(ErrorCode::parse, "expected key<TAB>value", row);
    const auto key = line.substr(0, tab);
    const auto value = line.substr(tab + 1);
    if (auto it = required.find(key); it != required.end()) it->second = true;
    if (key == "alpha") r.params.alpha = parse_double(value, row);
    else if (key == "beta") r.params.beta = parse_double(value, row);
    else if (key == "fit_r2") r.fit_r2 = parse_double(value, row);
    else if (key == "mean_t") r.mean_t = parse_double(value, row);
    else if (key == "mean_omega") r.mean_omega = parse_double(value, row);
    else if (key == "use_sigmoid") {
      if (value != "true" && value != "false") throw Error(ErrorCode::parse, "use_sigmoid must be true or false", row);
      r.use_sigmoid = value == "true";
    } else if (key == "warning") r.warnings.emplace_back(value);
    else if (key == "points") {
      n_points = parse_count(value, row);
      in_table = true;
    } else throw Error(ErrorCode::parse, "unknown key '" + std::string(key) + "'", row);
  }
  for (const auto& [key, seen] : required) {
    if (!seen) throw Error(ErrorCode::parse, "calibration lacks '" + key + "'");
  }
  if (!next_line(line) || line != "fmr_target\tthreshold\tomega_opt\tfnmr") {
    throw Error(ErrorCode::parse, "missing points header", row);
  }
  for (std::size_t k = 0; k < n_points; ++k) {
    if (!next_line(line)) throw Error(ErrorCode::parse, "fewer points than announced", row);
    const auto f = split(line, '\t');
    if (f.size() != 4) throw Error(ErrorCode::parse, "point rows need 4 columns", row);
    r.points.push_back({parse_double(f[0], row), parse_double(f[1], row), parse_double(f[2], row),
                        parse_double(f[3], row)});
  }
  while (next_line(line)) {
    if (!line.empty()) throw Error(ErrorCode::parse, "unexpected content after points", row);
  }
  return r;
}

CalibrationResult load_calibration(const std::filesystem::path& path) {
  return parse_calibration(read_file(path));
}

void save_calibration(const std::filesystem::path& path, const CalibrationResult& result) {
  write_file_atomic(path, format_calibration(result));
}

}  // namespace qav
