#include "dab/spectrum.hpp"

#include <cmath>
#include <stdexcept>

namespace dab {

HarmonicSpectrum::HarmonicSpectrum(int kmax) : k_max(kmax) {
    if (kmax < 1 || kmax % 2 == 0)
        throw std::invalid_argument("k_max must be odd and >= 1");
    coeff.assign((kmax + 1) / 2, {0.0, 0.0});
}

std::complex<double>& HarmonicSpectrum::at(int k) {
    if (k < 1 || k > k_max || k % 2 == 0)
        throw std::out_of_range("harmonic index must be odd and within k_max");
    return coeff[(k - 1) / 2];
}

const std::complex<double>& HarmonicSpectrum::at(int k) const {
    return const_cast<HarmonicSpectrum*>(this)->at(k);
}

double HarmonicSpectrum::value(double theta) const {
    double v = 0.0;
    for (int i = 0; i < count(); ++i) {
        const int k = harmonic(i);
        v += std::abs(coeff[i]) * std::sin(k * theta + std::arg(coeff[i]));
    }
    return v;
}

double HarmonicSpectrum::rms() const {
    double sum = 0.0;
    for (const auto& c : coeff) sum += 0.5 * std::norm(c);
    return std::sqrt(sum);
}

Waveform reconstruct_waveform(const HarmonicSpectrum& spec, int samples_per_period) {
    if (samples_per_period < 4 * spec.k_max)
        throw std::invalid_argument("samples_per_period must be >= 4*k_max");
    Waveform w;
    w.samples.resize(samples_per_period);
    for (int n = 0; n < samples_per_period; ++n)
        w.samples[n] = spec.value(2.0 * M_PI * n / samples_per_period);
    w.rms = spec.rms();
    return w;
}

}  // namespace dab
