#include "mbd/serialize.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "mbd/error.hpp"

namespace mbd {

using nlohmann::json;

namespace {

json to_json(const LinearModel& m) {
    return json{{"weights", m.weights},
                {"intercept", m.intercept},
                {"kind", m.kind == LinearKind::SvmHinge ? "svm-hinge" : "logistic"}};
}

LinearModel linear_from_json(const json& j) {
    LinearModel m;
    m.weights = j.at("weights").get<std::vector<double>>();
    m.intercept = j.at("intercept").get<double>();
    m.kind = j.at("kind").get<std::string>() == "svm-hinge" ? LinearKind::SvmHinge
                                                            : LinearKind::Logistic;
    return m;
}

json to_json(const Gmm& g) {
    json components = json::array();
    for (const GaussComponent& c : g.components)
        components.push_back({{"mean", c.mean}, {"variance", c.variance}, {"weight", c.weight}});
    return json{{"components", components}, {"log_likelihood_trace", g.log_likelihood_trace}};
}

Gmm gmm_from_json(const json& j) {
    Gmm g;
    for (const json& c : j.at("components"))
        g.components.push_back({c.at("mean").get<double>(), c.at("variance").get<double>(),
                                c.at("weight").get<double>()});
    g.log_likelihood_trace = j.at("log_likelihood_trace").get<std::vector<double>>();
    return g;
}

json to_json(const PositionModel& pm) {
    json positions = json::array();
    for (const PositionSlot& slot : pm.positions)
        positions.push_back({{"gmm", to_json(slot.gmm)},
                             {"bias_posterior", slot.table.bias_posterior},
                             {"samples", slot.samples}});
    return json{{"k", pm.k},
                {"components", pm.component_count},
                {"method", to_string(pm.method)},
                {"m", pm.m},
                {"bias_type", to_string(pm.bias_type)},
                {"bias_prior", pm.bias_prior},
                {"positions", positions}};
}

PositionModel position_from_json(const json& j) {
    PositionModel pm;
    pm.k = j.at("k").get<int>();
    pm.component_count = j.at("components").get<int>();
    pm.method = sampling_from_string(j.at("method").get<std::string>());
    pm.m = j.at("m").get<int>();
    pm.bias_type = bias_type_from_string(j.at("bias_type").get<std::string>());
    pm.bias_prior = j.at("bias_prior").get<double>();
    for (const json& pj : j.at("positions")) {
        PositionSlot slot;
        slot.gmm = gmm_from_json(pj.at("gmm"));
        slot.table.bias_posterior = pj.at("bias_posterior").get<std::vector<double>>();
        slot.table.bias_prior = pm.bias_prior;
        slot.samples = pj.at("samples").get<std::vector<double>>();
        pm.positions.push_back(std::move(slot));
    }
    return pm;
}

json to_json(const TransitionModel& tm) {
    return json{{"order", tm.order},
                {"k", tm.k},
                {"components", tm.component_count},
                {"bias_posterior", tm.bias_posterior}};
}

TransitionModel transition_from_json(const json& j) {
    TransitionModel tm;
    tm.order = j.at("order").get<int>();
    tm.k = j.at("k").get<int>();
    tm.component_count = j.at("components").get<int>();
    tm.bias_posterior = j.at("bias_posterior").get<std::vector<std::vector<double>>>();
    return tm;
}

json to_json(const NgramVocab& vocab) {
    // id-ordered gram list keeps the encoding canonical
    std::vector<std::string> grams(vocab.ids.size());
    for (const auto& [gram, id] : vocab.ids) grams[static_cast<std::size_t>(id)] = gram;
    return json{{"n_max", vocab.n_max}, {"min_count", vocab.min_count}, {"grams", grams}};
}

NgramVocab vocab_from_json(const json& j) {
    NgramVocab vocab;
    vocab.n_max = j.at("n_max").get<int>();
    vocab.min_count = j.at("min_count").get<int>();
    const auto grams = j.at("grams").get<std::vector<std::string>>();
    for (std::size_t i = 0; i < grams.size(); ++i) vocab.ids[grams[i]] = static_cast<int>(i);
    return vocab;
}

const char* family_name(BaseFamily f) {
    switch (f) {
    case BaseFamily::Frequency: return "frequency";
    case BaseFamily::Position: return "position";
    default: return "sequence";
    }
}

BaseFamily family_from_string(const std::string& s) {
    if (s == "frequency") return BaseFamily::Frequency;
    if (s == "position") return BaseFamily::Position;
    if (s == "sequence") return BaseFamily::Sequence;
    throw ParseError("unknown base family: '" + s + "'");
}

json to_json(const StackingModel& m) {
    json bases = json::array();
    for (BaseFamily f : m.bases) bases.push_back(family_name(f));
    json j{{"bases", bases}, {"bias_type", to_string(m.bias_type)}, {"meta", to_json(m.meta)}};
    if (m.fabs_svm) j["fabs_svm"] = to_json(*m.fabs_svm);
    if (m.frel_svm) j["frel_svm"] = to_json(*m.frel_svm);
    if (m.position_pm) j["position_pm"] = to_json(*m.position_pm);
    if (m.position_svm) j["position_svm"] = to_json(*m.position_svm);
    if (m.sequence_pm) j["sequence_pm"] = to_json(*m.sequence_pm);
    if (m.sequence_tm) j["sequence_tm"] = to_json(*m.sequence_tm);
    if (m.sequence_svm) j["sequence_svm"] = to_json(*m.sequence_svm);
    return j;
}

StackingModel stacking_from_json(const json& j) {
    StackingModel m;
    for (const json& f : j.at("bases")) m.bases.push_back(family_from_string(f.get<std::string>()));
    m.bias_type = bias_type_from_string(j.at("bias_type").get<std::string>());
    m.meta = linear_from_json(j.at("meta"));
    if (j.contains("fabs_svm")) m.fabs_svm = linear_from_json(j.at("fabs_svm"));
    if (j.contains("frel_svm")) m.frel_svm = linear_from_json(j.at("frel_svm"));
    if (j.contains("position_pm")) m.position_pm = position_from_json(j.at("position_pm"));
    if (j.contains("position_svm")) m.position_svm = linear_from_json(j.at("position_svm"));
    if (j.contains("sequence_pm")) m.sequence_pm = position_from_json(j.at("sequence_pm"));
    if (j.contains("sequence_tm")) m.sequence_tm = transition_from_json(j.at("sequence_tm"));
    if (j.contains("sequence_svm")) m.sequence_svm = linear_from_json(j.at("sequence_svm"));
    return m;
}

json to_json(const GridPoint& p) {
    return json{{"method", to_string(p.method)}, {"k", p.k},
                {"L", p.component_count},        {"order", p.order},
                {"C", p.cost},                   {"balanced", p.balanced},
                {"ngram_binary", p.ngram_binary}};
}

GridPoint point_from_json(const json& j) {
    GridPoint p;
    p.method = sampling_from_string(j.at("method").get<std::string>());
    p.k = j.at("k").get<int>();
    p.component_count = j.at("L").get<int>();
    p.order = j.at("order").get<int>();
    p.cost = j.at("C").get<double>();
    p.balanced = j.at("balanced").get<bool>();
    p.ngram_binary = j.at("ngram_binary").get<bool>();
    return p;
}

} // namespace

void save_bundle(const ModelBundle& bundle, std::ostream& out) {
    const FittedPipeline& p = bundle.pipeline;
    json pj{{"kind", to_string(p.kind)},
            {"bias_type", to_string(p.bias_type)},
            {"hyper", to_json(p.hyper)}};
    if (p.pm) pj["position_model"] = to_json(*p.pm);
    if (p.tm) pj["transition_model"] = to_json(*p.tm);
    if (p.vocab) pj["vocab"] = to_json(*p.vocab);
    if (p.linear) pj["linear"] = to_json(*p.linear);
    if (p.stack) pj["stacking"] = to_json(*p.stack);

    json j{{"format", "mbdetect-model"},
           {"version", 1},
           {"corpus_fingerprint", bundle.corpus_fingerprint},
           {"seed", bundle.seed},
           {"pipeline", pj}};
    out << j.dump(2) << '\n';
}

namespace {

void require_parts(const FittedPipeline& p) {
    auto need = [&](bool present, const char* part) {
        if (!present)
            throw ParseError(std::string("model bundle for '") + to_string(p.kind) +
                             "' is missing its " + part);
    };
    switch (p.kind) {
    case PipelineKind::Majority: break;
    case PipelineKind::NgramSvm:
    case PipelineKind::NgramLogReg:
    case PipelineKind::SentenceNgramSvm:
    case PipelineKind::SentenceNgramLogReg:
        need(p.vocab.has_value(), "vocabulary");
        need(p.linear.has_value(), "linear model");
        break;
    case PipelineKind::FabsSvm:
    case PipelineKind::FrelSvm: need(p.linear.has_value(), "linear model"); break;
    case PipelineKind::PositionNb: need(p.pm.has_value(), "position model"); break;
    case PipelineKind::PositionSvm:
        need(p.pm.has_value(), "position model");
        need(p.linear.has_value(), "linear model");
        break;
    case PipelineKind::SequenceMarkov:
        need(p.pm.has_value(), "position model");
        need(p.tm.has_value(), "transition model");
        break;
    case PipelineKind::SequenceSvm:
        need(p.pm.has_value(), "position model");
        need(p.tm.has_value(), "transition model");
        need(p.linear.has_value(), "linear model");
        break;
    default: {
        need(p.stack.has_value(), "stacked model");
        const StackingModel& s = *p.stack;
        for (BaseFamily f : s.bases) {
            switch (f) {
            case BaseFamily::Frequency:
                need(s.fabs_svm.has_value() && s.frel_svm.has_value(), "frequency base");
                break;
            case BaseFamily::Position:
                need(s.position_pm.has_value() && s.position_svm.has_value(), "position base");
                break;
            case BaseFamily::Sequence:
                need(s.sequence_pm.has_value() && s.sequence_tm.has_value() &&
                         s.sequence_svm.has_value(),
                     "sequence base");
                break;
            }
        }
        break;
    }
    }
}

} // namespace

ModelBundle load_bundle(std::istream& in) {
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object() || j.value("format", "") != "mbdetect-model")
        throw ParseError("not a model bundle");
    try {
        if (j.at("version").get<int>() != 1)
            throw ParseError("unsupported model bundle version");
        ModelBundle bundle;
        bundle.corpus_fingerprint = j.at("corpus_fingerprint").get<std::uint64_t>();
        bundle.seed = j.at("seed").get<std::uint64_t>();
        const json& pj = j.at("pipeline");
        FittedPipeline& p = bundle.pipeline;
        p.kind = pipeline_from_string(pj.at("kind").get<std::string>());
        p.bias_type = bias_type_from_string(pj.at("bias_type").get<std::string>());
        p.hyper = point_from_json(pj.at("hyper"));
        if (pj.contains("position_model")) p.pm = position_from_json(pj.at("position_model"));
        if (pj.contains("transition_model"))
            p.tm = transition_from_json(pj.at("transition_model"));
        if (pj.contains("vocab")) p.vocab = vocab_from_json(pj.at("vocab"));
        if (pj.contains("linear")) p.linear = linear_from_json(pj.at("linear"));
        if (pj.contains("stacking")) p.stack = stacking_from_json(pj.at("stacking"));
        require_parts(p);
        return bundle;
    } catch (const json::exception& e) {
        throw ParseError(std::string("invalid model bundle: ") + e.what());
    }
}

} // namespace mbd
