#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "winstitch/image.hpp"

namespace winstitch {

// PFM: "PF" (3-channel, pixel-interleaved) or "Pf" (1-channel), ASCII width
// height and scale, then 32-bit floats in bottom-to-top row order. A negative
// scale means little-endian. The writer always emits the canonical form
// (little-endian, scale -1.0, single separators), which makes the external
// predictor protocol byte-testable. The bottom-to-top order is confined to
// this codec; the rest of the library sees top-to-bottom tensors.
//
// The stream reader consumes exactly one blob; the byte-vector reader also
// rejects trailing bytes. Blobs whose payload is shorter than the declared
// dimensions are rejected.
ImageTensor read_pfm(std::istream& in);
ImageTensor read_pfm(const std::vector<std::uint8_t>& bytes);
void write_pfm(std::ostream& out, const ImageTensor& image);
std::vector<std::uint8_t> write_pfm(const ImageTensor& image);

// Binary (P5) PGM, maxval 255 or 65535 (16-bit samples big-endian). Values
// are normalised to [0, 1] on read; writing expects [0, 1] and rounds
// half-to-even.
ImageTensor read_pgm(std::istream& in);
ImageTensor read_pgm(const std::vector<std::uint8_t>& bytes);
void write_pgm(std::ostream& out, const ImageTensor& image, int maxval = 255);
std::vector<std::uint8_t> write_pgm(const ImageTensor& image, int maxval = 255);

// Dispatch on the file extension (.pfm / .pgm).
ImageTensor load_image(const std::string& path);
void save_image(const std::string& path, const ImageTensor& image);

} // namespace winstitch
