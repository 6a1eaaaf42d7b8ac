#ifndef MBD_SERIALIZE_HPP
#define MBD_SERIALIZE_HPP

#include <cstdint>
#include <iosfwd>

#include "mbd/experiments.hpp"

namespace mbd {

// A fitted pipeline with enough metadata to recompute every reported number:
// the corpus fingerprint it was trained on and the seed that produced it.
struct ModelBundle {
    FittedPipeline pipeline;
    std::uint64_t corpus_fingerprint = 0;
    std::uint64_t seed = 0;
};

void save_bundle(const ModelBundle& bundle, std::ostream& out);
ModelBundle load_bundle(std::istream& in);

} // namespace mbd

#endif
