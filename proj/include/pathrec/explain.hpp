#pragma once

#include <string>

#include "pathrec/kg.hpp"

namespace pathrec {

// Sentence skeleton for a 3-hop path. Slots: {ek} recommended product,
// {r1} first relation, {e1} experienced product, {rk} last relation,
// {ek1} shared entity. Each slot must appear exactly once.
struct ExplanationTemplate {
    std::string text = "{ek} is recommended to you because you {r1} {e1} also {rk} by {ek1}";
};

std::string render_explanation(const ReasoningPath& p, const KnowledgeGraph& g,
                               const ExplanationTemplate& tmpl = {});

} // namespace pathrec
