#pragma once

#include "types.hpp"

#include <map>
#include <string>
#include <vector>

namespace unmix::csvio {

// Every file starts with a version line
//   # unmix-csv v1 <kind> [key=value ...]
// followed by a header row and data rows. Doubles are written with %.17g so
// a load/save round trip is value-exact, and all formatting is
// locale-independent, so regenerating a file with identical inputs is
// byte-identical.

std::string format_double(double v);

void save_bundles(const SpectralBundles& bundles, const std::string& path);
SpectralBundles load_bundles(const std::string& path);

void save_pixels(const PixelBatch& batch, const std::string& path);
PixelBatch load_pixels(const std::string& path);  // spectra and metadata only

void save_truth(const PixelBatch& batch, const std::string& path);
void load_truth(PixelBatch& batch, const std::string& path);  // attaches truth

// Matrix files with one column per pixel (abundances, per-atom abundances,
// bundling weights). `kind` tags the version line, `index_label` names the
// first column.
void save_named_matrix(const std::string& path, const std::string& kind,
                       const std::string& index_label, const Matrix& m,
                       const std::map<std::string, std::string>& meta = {});
Matrix load_named_matrix(const std::string& path, const std::string& kind,
                         std::map<std::string, std::string>* meta = nullptr);

// Long-format per-pixel objective traces: pixel,iter,objective.
void save_traces(const std::string& path,
                 const std::vector<std::vector<double>>& traces);
std::vector<std::vector<double>> load_traces(const std::string& path);

// 8-bit binary PGM, values scaled as round(255 * clamp(v, 0, 1)), pixels in
// row-major order.
void write_pgm(const std::string& path, const Vector& values, int width,
               int height);
std::vector<unsigned char> read_pgm(const std::string& path, int* width,
                                    int* height);

void write_text_file(const std::string& path, const std::string& content);
void ensure_parent_dir(const std::string& path);

}  // namespace unmix::csvio
