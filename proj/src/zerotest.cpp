#include "qfi/zerotest.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "qfi/rationalize.hpp"

namespace qfi {

namespace {

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double draw(std::mt19937_64& rng, const SampleRange& r) {
    double v = r.lo + uniform01(rng) * (r.hi - r.lo);
    if (r.signed_draw && (rng() & 1)) v = -v;
    return v;
}

ZeroTestResult exact_pass(const Expr& e) {
    ExtendedForm form = to_rational_fraction_extended(e);
    Poly reduced = reduce_modulo(form.fraction.num, form.extensions);
    if (reduced.is_zero()) return {Verdict::Zero, "exact", std::nullopt};
    if (form.extensions.empty()) return {Verdict::NonZero, "exact", std::nullopt};
    return {Verdict::Unknown, "exact", std::nullopt};
}

ZeroTestResult sampled_pass(const Expr& e, const ZeroTestOptions& opts) {
    std::vector<std::string> syms;
    for (const auto& s : free_symbols(e)) syms.push_back(symbol_name(s.sym_id()));
    std::sort(syms.begin(), syms.end());
    std::vector<std::string> fns;
    {
        std::set<std::string> seen;
        for (const auto& f : opaque_functions(e))
            if (seen.insert(f.fn_name()).second) fns.push_back(f.fn_name());
        std::sort(fns.begin(), fns.end());
    }

    std::mt19937_64 rng(opts.seed);
    const SampleRange fallback{};
    int valid = 0;
    for (int s = 0; s < opts.samples; ++s) {
        for (int attempt = 0; attempt < 40; ++attempt) {
            Binding b;
            SampleWitness w;
            for (const auto& name : syms) {
                auto it = opts.ranges.find(name);
                double v = draw(rng, it == opts.ranges.end() ? fallback : it->second);
                b.set(name, v);
                w.assignment.emplace_back(name, v);
            }
            for (const auto& name : fns) {
                double v = draw(rng, fallback);
                b.set_fn(name, v);
                w.assignment.emplace_back("fn:" + name, v);
            }
            double value, scale = 0.0;
            try {
                value = evaluate_double(e, b);
                if (e.kind() == Kind::Add)
                    for (const auto& k : e.kids())
                        scale += std::abs(evaluate_double(k, b));
            } catch (const DomainError&) {
                continue;  // redraw
            }
            if (!std::isfinite(value)) continue;
            ++valid;
            if (std::abs(value) > opts.eps * (1.0 + scale)) {
                w.value = value;
                w.scale = scale;
                return {Verdict::NonZero, "sampled", w};
            }
            break;
        }
    }
    if (valid < std::max(1, opts.samples / 2))
        return {Verdict::Unknown, "sampled", std::nullopt};
    return {Verdict::Zero, "sampled", std::nullopt};
}

}  // namespace

ZeroTestResult test_zero(const Expr& e, const ZeroTestOptions& opts) {
    if (e.is_num()) {
        return {e.value() == 0 ? Verdict::Zero : Verdict::NonZero, "exact",
                std::nullopt};
    }
    switch (opts.strategy) {
        case ZeroStrategy::ExactOnly:
            return exact_pass(e);
        case ZeroStrategy::SampledOnly:
            return sampled_pass(e, opts);
        case ZeroStrategy::ExactThenSampled: {
            ZeroTestResult r = exact_pass(e);
            if (r.verdict != Verdict::Unknown) return r;
            return sampled_pass(e, opts);
        }
    }
    return {Verdict::Unknown, "", std::nullopt};
}

bool is_identically_zero(const Expr& e, const ZeroTestOptions& opts) {
    return test_zero(e, opts).verdict == Verdict::Zero;
}

}  // namespace qfi
