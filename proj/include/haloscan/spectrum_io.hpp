#pragma once

// Versioned spectrum files: a key/value text header terminated by
// "end_header", followed by n_bins PSD values, either one per line (%.17g)
// or as little-endian IEEE-754 doubles.

#include "haloscan/campaign_sim.hpp"

#include <filesystem>
#include <iosfwd>

namespace haloscan {

inline constexpr int kSpectrumFormatVersion = 1;

enum class SpectrumEncoding { text, binary };

void write_spectrum(std::ostream& os, const RawSpectrum& s, SpectrumEncoding encoding);
RawSpectrum read_spectrum(std::istream& is);

void save_spectrum(const std::filesystem::path& path, const RawSpectrum& s,
                   SpectrumEncoding encoding = SpectrumEncoding::binary);
RawSpectrum load_spectrum(const std::filesystem::path& path);

}  // namespace haloscan
