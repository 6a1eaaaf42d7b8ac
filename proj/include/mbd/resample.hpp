#ifndef MBD_RESAMPLE_HPP
#define MBD_RESAMPLE_HPP

#include <string>
#include <vector>

namespace mbd {

enum class Sampling { Average, Maximum, Last };

const char* to_string(Sampling s);
Sampling sampling_from_string(const std::string& s);

struct NormalizedSequence {
    std::vector<double> values; // length k, all in [0, 1]
    int k = 0;
    Sampling method = Sampling::Average;
    int m = 0; // intermediate length actually used
};

// Linear interpolation of seq (samples at (i-1)/(n-1) on [0,1]) evaluated at
// (j-1)/(m-1). Endpoints are preserved; a length-1 input upsamples to a
// constant.
std::vector<double> upsample(const std::vector<double>& seq, int m);
std::vector<double> upsample(const std::vector<int>& seq, int m);

// Partitions the m indices into k contiguous near-equal bins
// (bin i covers 1-based indices floor((i-1)m/k)+1 .. floor(im/k)) and reduces
// each bin by the chosen method.
std::vector<double> downsample(const std::vector<double>& seq, int k, Sampling method);

// Two-step normalization: upsample to m, then downsample to k. The
// intermediate length is raised to n when an article is longer than m.
NormalizedSequence normalize(const std::vector<int>& seq, int k, Sampling method, int m = 100);

} // namespace mbd

#endif
