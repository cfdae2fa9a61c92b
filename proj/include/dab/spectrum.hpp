#pragma once

#include <complex>
#include <vector>

namespace dab {

/// Odd-harmonic phasor spectrum. The phasor convention follows the sine
/// reconstruction f(t) = sum_k Im(F_k * e^{j k w t}), k = 1, 3, 5, ...
struct HarmonicSpectrum {
    int k_max = 1;
    std::vector<std::complex<double>> coeff;  // coeff[i] is harmonic k = 2i+1

    HarmonicSpectrum() : HarmonicSpectrum(1) {}
    explicit HarmonicSpectrum(int kmax);

    int count() const { return static_cast<int>(coeff.size()); }
    int harmonic(int i) const { return 2 * i + 1; }

    std::complex<double>& at(int k);
    const std::complex<double>& at(int k) const;

    /// Time-domain value at angle theta = w*t (radians within the period).
    double value(double theta) const;

    /// True RMS, sqrt(sum 1/2 |F_k|^2).
    double rms() const;
};

struct Waveform {
    std::vector<double> samples;  // uniformly spaced over one period
    double rms = 0.0;
};

/// Superposition reconstruction over one period. samples_per_period must be
/// at least 4*k_max (anti-aliasing). The reported RMS is spectral
/// (sqrt of the half-sum of squared magnitudes), not the sample RMS.
Waveform reconstruct_waveform(const HarmonicSpectrum& spec, int samples_per_period);

}  // namespace dab
