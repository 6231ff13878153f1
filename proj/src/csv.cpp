#include "csv.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace unmix::csvio {

namespace {

constexpr const char* kMagic = "# unmix-csv";
constexpr const char* kVersion = "v1";

std::string err_at(const std::string& path, int line, const std::string& msg) {
  return path + ":" + std::to_string(line) + ": " + msg;
}

struct Reader {
  std::string path;
  std::ifstream in;
  int line_no = 0;

  explicit Reader(const std::string& p) : path(p), in(p) {
    if (!in) throw DataError(path + ": cannot open for reading");
  }

  bool next_line(std::string& line) {
    if (!std::getline(in, line)) return false;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw DataError(err_at(path, line_no, msg));
  }
};

std::vector<std::string> split(const std::string& line, char sep = ',') {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    std::size_t pos = line.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

double parse_double(Reader& r, const std::string& cell) {
  if (cell == "inf") return std::numeric_limits<double>::infinity();
  if (cell == "-inf") return -std::numeric_limits<double>::infinity();
  const char* s = cell.c_str();
  char* end = nullptr;
  double v = std::strtod(s, &end);
  if (end == s || *end != '\0')
    r.fail("expected a number, got '" + cell + "'");
  return v;
}

long parse_int(Reader& r, const std::string& cell) {
  const char* s = cell.c_str();
  char* end = nullptr;
  long v = std::strtol(s, &end, 10);
  if (end == s || *end != '\0')
    r.fail("expected an integer, got '" + cell + "'");
  return v;
}

// Reads and checks the version line; returns the metadata key=value pairs.
std::map<std::string, std::string> read_version_line(Reader& r,
                                                     const std::string& kind) {
  std::string line;
  if (!r.next_line(line)) r.fail("empty file");
  std::istringstream ss(line);
  std::string hash, name, version, k;
  ss >> hash >> name >> version >> k;
  if (hash != "#" || name != "unmix-csv")
    r.fail("not an unmix CSV file (missing '# unmix-csv' version line)");
  if (version != kVersion)
    r.fail("unsupported schema version '" + version + "'; this build reads " +
           kVersion);
  if (k != kind)
    r.fail("expected a '" + kind + "' file, found '" + k + "'");
  std::map<std::string, std::string> meta;
  std::string pair;
  while (ss >> pair) {
    std::size_t eq = pair.find('=');
    if (eq == std::string::npos) r.fail("malformed metadata '" + pair + "'");
    meta[pair.substr(0, eq)] = pair.substr(eq + 1);
  }
  return meta;
}

std::string version_line(const std::string& kind,
                         const std::map<std::string, std::string>& meta) {
  std::string line = std::string(kMagic) + " " + kVersion + " " + kind;
  for (const auto& [k, v] : meta) line += " " + k + "=" + v;
  line += "\n";
  return line;
}

std::ofstream open_out(const std::string& path) {
  ensure_parent_dir(path);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(path + ": cannot open for writing");
  return out;
}

double meta_double(Reader& r, const std::map<std::string, std::string>& meta,
                   const std::string& key, double fallback) {
  auto it = meta.find(key);
  if (it == meta.end()) return fallback;
  return parse_double(r, it->second);
}

}  // namespace

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void ensure_parent_dir(const std::string& path) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
    if (ec)
      throw DataError(p.parent_path().string() +
                      ": cannot create directory: " + ec.message());
  }
}

void write_text_file(const std::string& path, const std::string& content) {
  auto out = open_out(path);
  out << content;
  if (!out) throw DataError(path + ": write failed");
}

void save_bundles(const SpectralBundles& bundles, const std::string& path) {
  auto out = open_out(path);
  out << version_line("bundles", {});
  out << "wavelength";
  for (int k = 0; k < bundles.class_count(); ++k) {
    std::string name = bundles.class_names().empty()
                           ? "class" + std::to_string(k + 1)
                           : bundles.class_names()[k];
    for (int j = 0; j < bundles.atoms_per_class()[k]; ++j)
      out << ",class:" << name << ":" << j;
  }
  out << "\n";
  for (int l = 0; l < bundles.bands(); ++l) {
    out << l;
    for (int n = 0; n < bundles.atom_count(); ++n)
      out << "," << format_double(bundles.atoms()(l, n));
    out << "\n";
  }
  if (!out) throw DataError(path + ": write failed");
}

SpectralBundles load_bundles(const std::string& path) {
  Reader r(path);
  read_version_line(r, "bundles");
  std::string line;
  if (!r.next_line(line)) r.fail("missing header row");
  auto cols = split(line);
  if (cols.size() < 2 || cols[0] != "wavelength")
    r.fail("header must start with 'wavelength'");

  std::vector<std::string> names;
  std::vector<int> sizes;
  for (std::size_t c = 1; c < cols.size(); ++c) {
    auto parts = split(cols[c], ':');
    if (parts.size() != 3 || parts[0] != "class")
      r.fail("atom column '" + cols[c] + "' must look like class:<name>:<i>");
    const std::string& name = parts[1];
    if (!names.empty() && names.back() == name) {
      ++sizes.back();
    } else {
      if (std::find(names.begin(), names.end(), name) != names.end())
        r.fail("class '" + name + "' appears in non-contiguous blocks");
      names.push_back(name);
      sizes.push_back(1);
    }
  }

  const int n = static_cast<int>(cols.size()) - 1;
  std::vector<std::vector<double>> rows;
  while (r.next_line(line)) {
    if (line.empty()) continue;
    auto cells = split(line);
    if (static_cast<int>(cells.size()) != n + 1)
      r.fail("expected " + std::to_string(n + 1) + " cells, got " +
             std::to_string(cells.size()));
    std::vector<double> row(n);
    parse_double(r, cells[0]);  // wavelength column, value unused
    for (int j = 0; j < n; ++j) row[j] = parse_double(r, cells[j + 1]);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) r.fail("no data rows");
  Matrix atoms(static_cast<int>(rows.size()), n);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (int j = 0; j < n; ++j) atoms(static_cast<int>(i), j) = rows[i][j];
  return SpectralBundles(std::move(atoms), std::move(sizes), std::move(names));
}

void save_pixels(const PixelBatch& batch, const std::string& path) {
  auto out = open_out(path);
  std::map<std::string, std::string> meta = {
      {"dataset", batch.dataset},
      {"seed", std::to_string(batch.seed)},
      {"snr_db", format_double(batch.snr_db)}};
  out << version_line("pixels", meta);
  out << "band";
  for (int p = 0; p < batch.pixels(); ++p) out << ",pixel:" << p;
  out << "\n";
  for (int l = 0; l < batch.bands(); ++l) {
    out << l;
    for (int p = 0; p < batch.pixels(); ++p)
      out << "," << format_double(batch.spectra(l, p));
    out << "\n";
  }
  if (!out) throw DataError(path + ": write failed");
}

PixelBatch load_pixels(const std::string& path) {
  Reader r(path);
  auto meta = read_version_line(r, "pixels");
  std::string line;
  if (!r.next_line(line)) r.fail("missing header row");
  auto cols = split(line);
  if (cols.size() < 2 || cols[0] != "band")
    r.fail("header must start with 'band'");
  const int pp = static_cast<int>(cols.size()) - 1;

  std::vector<std::vector<double>> rows;
  while (r.next_line(line)) {
    if (line.empty()) continue;
    auto cells = split(line);
    if (static_cast<int>(cells.size()) != pp + 1)
      r.fail("expected " + std::to_string(pp + 1) + " cells, got " +
             std::to_string(cells.size()));
    std::vector<double> row(pp);
    parse_double(r, cells[0]);
    for (int j = 0; j < pp; ++j) row[j] = parse_double(r, cells[j + 1]);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) r.fail("no data rows");

  PixelBatch batch;
  batch.spectra = Matrix(static_cast<int>(rows.size()), pp);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (int j = 0; j < pp; ++j)
      batch.spectra(static_cast<int>(i), j) = rows[i][j];
  batch.snr_db = meta_double(r, meta, "snr_db",
                             std::numeric_limits<double>::infinity());
  if (auto it = meta.find("dataset"); it != meta.end())
    batch.dataset = it->second;
  batch.seed = static_cast<std::uint64_t>(meta_double(r, meta, "seed", 0));
  return batch;
}

void save_truth(const PixelBatch& batch, const std::string& path) {
  if (!batch.truth) throw ParameterError("save_truth: batch carries no truth");
  const BatchTruth& t = *batch.truth;
  auto out = open_out(path);
  std::map<std::string, std::string> meta = {
      {"classes", std::to_string(t.abundance.rows())},
      {"atoms", std::to_string(t.multiple.rows())},
      {"pixels", std::to_string(batch.pixels())},
      {"has_bundling", t.has_bundling() ? "1" : "0"}};
  out << version_line("truth", meta);
  out << "pixel,kind,index,value\n";
  for (int i = 0; i < batch.pixels(); ++i) {
    for (int k = 0; k < t.abundance.rows(); ++k)
      if (t.abundance(k, i) != 0.0)
        out << i << ",a," << k << "," << format_double(t.abundance(k, i))
            << "\n";
    for (int n = 0; n < t.multiple.rows(); ++n)
      if (t.multiple(n, i) != 0.0)
        out << i << ",r," << n << "," << format_double(t.multiple(n, i))
            << "\n";
    if (t.has_bundling())
      for (int n = 0; n < t.bundling.rows(); ++n)
        if (t.bundling(n, i) != 0.0)
          out << i << ",b," << n << "," << format_double(t.bundling(n, i))
              << "\n";
    for (int k : t.class_support[i]) out << i << ",class_support," << k << ",1\n";
    for (int n : t.atom_support[i]) out << i << ",atom_support," << n << ",1\n";
  }
  if (!out) throw DataError(path + ": write failed");
}

void load_truth(PixelBatch& batch, const std::string& path) {
  Reader r(path);
  auto meta = read_version_line(r, "truth");
  auto need = [&](const char* key) -> long {
    auto it = meta.find(key);
    if (it == meta.end())
      r.fail(std::string("missing required metadata '") + key + "'");
    return parse_int(r, it->second);
  };
  const int kk = static_cast<int>(need("classes"));
  const int nn = static_cast<int>(need("atoms"));
  const int pp = static_cast<int>(need("pixels"));
  const bool has_b = need("has_bundling") != 0;
  if (pp != batch.pixels())
    r.fail("truth is for " + std::to_string(pp) + " pixels but the batch has " +
           std::to_string(batch.pixels()));

  std::string line;
  if (!r.next_line(line)) r.fail("missing header row");
  if (line != "pixel,kind,index,value")
    r.fail("expected header 'pixel,kind,index,value'");

  BatchTruth t;
  t.abundance = Matrix::Zero(kk, pp);
  t.multiple = Matrix::Zero(nn, pp);
  if (has_b) t.bundling = Matrix::Zero(nn, pp);
  t.class_support.resize(pp);
  t.atom_support.resize(pp);

  while (r.next_line(line)) {
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != 4) r.fail("expected 4 cells");
    const int pix = static_cast<int>(parse_int(r, cells[0]));
    if (pix < 0 || pix >= pp) r.fail("pixel index out of range");
    const std::string& kind = cells[1];
    const int idx = static_cast<int>(parse_int(r, cells[2]));
    const double val = parse_double(r, cells[3]);
    const int limit = (kind == "a" || kind == "class_support") ? kk : nn;
    if (idx < 0 || idx >= limit) r.fail("index out of range for '" + kind + "'");
    if (kind == "a")
      t.abundance(idx, pix) = val;
    else if (kind == "r")
      t.multiple(idx, pix) = val;
    else if (kind == "b") {
      if (!has_b) r.fail("bundling row in a file declaring has_bundling=0");
      t.bundling(idx, pix) = val;
    } else if (kind == "class_support")
      t.class_support[pix].push_back(idx);
    else if (kind == "atom_support")
      t.atom_support[pix].push_back(idx);
    else
      r.fail("unknown kind '" + kind + "'");
  }
  for (auto& s : t.class_support) std::sort(s.begin(), s.end());
  for (auto& s : t.atom_support) std::sort(s.begin(), s.end());
  batch.truth = std::move(t);
}

void save_named_matrix(const std::string& path, const std::string& kind,
                       const std::string& index_label, const Matrix& m,
                       const std::map<std::string, std::string>& meta) {
  auto out = open_out(path);
  out << version_line(kind, meta);
  out << index_label;
  for (int p = 0; p < m.cols(); ++p) out << ",pixel:" << p;
  out << "\n";
  for (int i = 0; i < m.rows(); ++i) {
    out << i;
    for (int p = 0; p < m.cols(); ++p) out << "," << format_double(m(i, p));
    out << "\n";
  }
  if (!out) throw DataError(path + ": write failed");
}

Matrix load_named_matrix(const std::string& path, const std::string& kind,
                         std::map<std::string, std::string>* meta_out) {
  Reader r(path);
  auto meta = read_version_line(r, kind);
  std::string line;
  if (!r.next_line(line)) r.fail("missing header row");
  auto cols = split(line);
  if (cols.size() < 2) r.fail("expected at least one pixel column");
  const int pp = static_cast<int>(cols.size()) - 1;
  std::vector<std::vector<double>> rows;
  while (r.next_line(line)) {
    if (line.empty()) continue;
    auto cells = split(line);
    if (static_cast<int>(cells.size()) != pp + 1)
      r.fail("expected " + std::to_string(pp + 1) + " cells, got " +
             std::to_string(cells.size()));
    std::vector<double> row(pp);
    parse_int(r, cells[0]);
    for (int j = 0; j < pp; ++j) row[j] = parse_double(r, cells[j + 1]);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) r.fail("no data rows");
  Matrix m(static_cast<int>(rows.size()), pp);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (int j = 0; j < pp; ++j) m(static_cast<int>(i), j) = rows[i][j];
  if (meta_out) *meta_out = std::move(meta);
  return m;
}

void save_traces(const std::string& path,
                 const std::vector<std::vector<double>>& traces) {
  auto out = open_out(path);
  out << version_line("objective_trace", {});
  out << "pixel,iter,objective\n";
  for (std::size_t i = 0; i < traces.size(); ++i)
    for (std::size_t t = 0; t < traces[i].size(); ++t)
      out << i << "," << t << "," << format_double(traces[i][t]) << "\n";
  if (!out) throw DataError(path + ": write failed");
}

std::vector<std::vector<double>> load_traces(const std::string& path) {
  Reader r(path);
  read_version_line(r, "objective_trace");
  std::string line;
  if (!r.next_line(line)) r.fail("missing header row");
  if (line != "pixel,iter,objective")
    r.fail("expected header 'pixel,iter,objective'");
  std::vector<std::vector<double>> traces;
  while (r.next_line(line)) {
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != 3) r.fail("expected 3 cells");
    const long pix = parse_int(r, cells[0]);
    const long it = parse_int(r, cells[1]);
    const double val = parse_double(r, cells[2]);
    if (pix < 0) r.fail("negative pixel index");
    if (static_cast<std::size_t>(pix) >= traces.size())
      traces.resize(pix + 1);
    if (static_cast<std::size_t>(it) != traces[pix].size())
      r.fail("trace rows for a pixel must list iterations in order");
    traces[pix].push_back(val);
  }
  return traces;
}

void write_pgm(const std::string& path, const Vector& values, int width,
               int height) {
  if (width < 1 || height < 1)
    throw ParameterError("write_pgm: bad dimensions");
  if (values.size() != static_cast<long>(width) * height)
    throw DimensionError("write_pgm: value count does not match w*h");
  auto out = open_out(path);
  out << "P5\n" << width << " " << height << "\n255\n";
  for (long i = 0; i < values.size(); ++i) {
    double v = std::clamp(values[i], 0.0, 1.0);
    out.put(static_cast<char>(std::lround(255.0 * v)));
  }
  if (!out) throw DataError(path + ": write failed");
}

std::vector<unsigned char> read_pgm(const std::string& path, int* width,
                                    int* height) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path + ": cannot open for reading");
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  in >> magic >> w >> h >> maxval;
  if (magic != "P5" || maxval != 255 || w < 1 || h < 1)
    throw DataError(path + ": not an 8-bit binary PGM");
  in.get();  // single whitespace after the header
  std::vector<unsigned char> data(static_cast<std::size_t>(w) * h);
  in.read(reinterpret_cast<char*>(data.data()), data.size());
  if (in.gcount() != static_cast<std::streamsize>(data.size()))
    throw DataError(path + ": truncated pixel data");
  if (width) *width = w;
  if (height) *height = h;
  return data;
}

}  // namespace unmix::csvio
