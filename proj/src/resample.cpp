#include "mbd/resample.hpp"

#include <algorithm>
#include <cstdint>
#include <string>

#include "mbd/error.hpp"

namespace mbd {

const char* to_string(Sampling s) {
    switch (s) {
    case Sampling::Average: return "average";
    case Sampling::Maximum: return "maximum";
    default: return "last";
    }
}

Sampling sampling_from_string(const std::string& s) {
    if (s == "average") return Sampling::Average;
    if (s == "maximum") return Sampling::Maximum;
    if (s == "last") return Sampling::Last;
    throw ValidationError("unknown sampling method: '" + s + "'");
}

std::vector<double> upsample(const std::vector<double>& seq, int m) {
    const int n = static_cast<int>(seq.size());
    if (n == 0) throw ValidationError("upsample: empty sequence");
    if (m < n) throw ValidationError("upsample: m (" + std::to_string(m) +
                                     ") must be >= sequence length (" + std::to_string(n) + ")");
    std::vector<double> out(m);
    if (n == 1) {
        std::fill(out.begin(), out.end(), seq[0]);
        return out;
    }
    for (int j = 0; j < m; ++j) {
        // node-space position; exact at the endpoints and when m == n
        double pos = static_cast<double>(j) * (n - 1) / (m - 1);
        int i = static_cast<int>(pos);
        if (i >= n - 1) {
            out[j] = seq[n - 1];
        } else {
            double frac = pos - i;
            out[j] = seq[i] * (1.0 - frac) + seq[i + 1] * frac;
        }
    }
    return out;
}

std::vector<double> upsample(const std::vector<int>& seq, int m) {
    return upsample(std::vector<double>(seq.begin(), seq.end()), m);
}

std::vector<double> downsample(const std::vector<double>& seq, int k, Sampling method) {
    const auto m = static_cast<std::int64_t>(seq.size());
    if (k <= 0) throw ValidationError("downsample: k must be >= 1");
    if (k > m) throw ValidationError("downsample: k (" + std::to_string(k) +
                                     ") must be <= sequence length (" + std::to_string(m) + ")");
    std::vector<double> out(k);
    for (std::int64_t i = 1; i <= k; ++i) {
        std::int64_t lo = (i - 1) * m / k; // 0-based inclusive
        std::int64_t hi = i * m / k;       // 0-based exclusive
        switch (method) {
        case Sampling::Average: {
            double sum = 0.0;
            for (std::int64_t j = lo; j < hi; ++j) sum += seq[j];
            out[i - 1] = sum / static_cast<double>(hi - lo);
            break;
        }
        case Sampling::Maximum:
            out[i - 1] = *std::max_element(seq.begin() + lo, seq.begin() + hi);
            break;
        case Sampling::Last:
            out[i - 1] = seq[hi - 1];
            break;
        }
    }
    return out;
}

NormalizedSequence normalize(const std::vector<int>& seq, int k, Sampling method, int m) {
    const int n = static_cast<int>(seq.size());
    if (n == 0) throw ValidationError("normalize: empty sequence");
    const int effective_m = std::max(m, n);
    if (k > effective_m)
        throw ValidationError("normalize: k (" + std::to_string(k) + ") exceeds m (" +
                              std::to_string(effective_m) + ")");
    NormalizedSequence out;
    out.values = downsample(upsample(seq, effective_m), k, method);
    out.k = k;
    out.method = method;
    out.m = effective_m;
    return out;
}

} // namespace mbd
