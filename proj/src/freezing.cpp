#include "pfrost/freezing.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "pfrost/error.hpp"
#include "pfrost/init.hpp"

namespace pfrost {

namespace {

const std::set<std::string> kValidPaths = {
    "emb", "att", "ffn", "att.self", "att.context", "att.enc", "att.dec",
    "ffn.enc", "ffn.dec",
};

bool path_matches(const std::string& path, const ComponentTag& tag) {
    if (path == "emb") return tag.group == Group::EMB;
    if (path == "att") return tag.group == Group::ATT;
    if (path == "ffn") return tag.group == Group::FFN;
    if (path == "att.self") return tag.group == Group::ATT && tag.att_kind == AttKind::self;
    if (path == "att.context") {
        return tag.group == Group::ATT && tag.att_kind == AttKind::context;
    }
    if (path == "att.enc") return tag.group == Group::ATT && tag.side == Side::encoder;
    if (path == "att.dec") return tag.group == Group::ATT && tag.side == Side::decoder;
    if (path == "ffn.enc") return tag.group == Group::FFN && tag.side == Side::encoder;
    if (path == "ffn.dec") return tag.group == Group::FFN && tag.side == Side::decoder;
    return false;
}

bool in_taxonomy(const ComponentTag& tag) {
    return tag.group == Group::EMB || tag.group == Group::ATT || tag.group == Group::FFN;
}

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

bool is_weight_role(const std::optional<MatrixRole>& role) {
    if (!role) return false;
    switch (*role) {
        case MatrixRole::query:
        case MatrixRole::key:
        case MatrixRole::value:
        case MatrixRole::output:
        case MatrixRole::ffn_in:
        case MatrixRole::ffn_out:
            return true;
        default:
            return false;
    }
}

}  // namespace

bool Selector::matches(const ComponentTag& tag) const {
    if (!in_taxonomy(tag)) return false;  // OTHER is never frozen by selectors
    const bool hit = path_matches(path, tag);
    return negated ? !hit : hit;
}

std::string Selector::str() const {
    std::string s = negated ? "!" + path : path;
    if (init == InitKind::diagonal) s += "@diag";
    return s;
}

FreezeSpec FreezeSpec::parse(const std::string& text) {
    FreezeSpec spec;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        Selector sel;
        std::vector<std::string> pieces;
        std::stringstream ps(item);
        std::string piece;
        while (std::getline(ps, piece, '@')) pieces.push_back(trim(piece));
        std::string path = pieces.empty() ? "" : pieces[0];
        if (!path.empty() && path[0] == '!') {
            sel.negated = true;
            path = trim(path.substr(1));
        }
        if (!kValidPaths.count(path)) {
            throw FreezeError("freeze spec: unknown selector path '" + path + "'");
        }
        sel.path = path;
        for (size_t i = 1; i < pieces.size(); ++i) {
            const std::string& mod = pieces[i];
            if (mod == "diag") {
                sel.init = InitKind::diagonal;
            } else if (mod.rfind("epoch=", 0) == 0) {
                int e;
                try {
                    e = std::stoi(mod.substr(6));
                } catch (const std::exception&) {
                    throw FreezeError("freeze spec: bad epoch in '" + item + "'");
                }
                if (e < 0) throw FreezeError("freeze spec: epoch must be non-negative");
                if (spec.freeze_at_epoch && *spec.freeze_at_epoch != e) {
                    throw FreezeError("freeze spec: conflicting @epoch values");
                }
                spec.freeze_at_epoch = e;
            } else {
                throw FreezeError("freeze spec: unknown modifier '@" + mod + "'");
            }
        }
        spec.selectors.push_back(std::move(sel));
    }
    return spec;
}

std::string FreezeSpec::str() const {
    std::string s;
    for (size_t i = 0; i < selectors.size(); ++i) {
        if (i) s += ",";
        s += selectors[i].str();
    }
    if (freeze_at_epoch && !selectors.empty()) {
        s += "@epoch=" + std::to_string(*freeze_at_epoch);
    }
    return s;
}

std::vector<std::vector<std::string>> resolve_selectors(const ParameterRegistry& reg,
                                                        const FreezeSpec& spec) {
    std::vector<std::vector<std::string>> resolved;
    std::set<std::string> seen;
    for (const Selector& sel : spec.selectors) {
        std::vector<std::string> names;
        for (const Parameter& p : reg.params()) {
            if (sel.matches(p.tag)) names.push_back(p.name);
        }
        if (names.empty()) {
            throw FreezeError("freeze spec: selector '" + sel.str() +
                              "' matches no parameters (empty selection)");
        }
        if (sel.init == InitKind::diagonal) {
            for (const std::string& n : names) {
                if (reg.at(n).tag.group == Group::EMB) {
                    throw FreezeError("freeze spec: diagonal init is not supported for "
                                      "embeddings ('" + sel.str() + "')");
                }
            }
        }
        for (const std::string& n : names) {
            if (!seen.insert(n).second) {
                throw FreezeError("freeze spec: selectors overlap on parameter '" + n + "'");
            }
        }
        resolved.push_back(std::move(names));
    }
    return resolved;
}

namespace {

FreezeReport summarize(const ParameterRegistry& reg, std::vector<std::string> affected,
                       bool deferred) {
    FreezeReport rep;
    rep.affected = std::move(affected);
    rep.deferred = deferred;
    for (const std::string& n : rep.affected) {
        rep.frozen_per_group[reg.at(n).tag.group] += reg.at(n).numel();
    }
    rep.total_params = reg.total_count();
    rep.trainable_params = reg.trainable_count();
    rep.ratio = rep.total_params == 0
                    ? 1.0
                    : static_cast<double>(rep.trainable_params) /
                          static_cast<double>(rep.total_params);
    return rep;
}

}  // namespace

FreezeReport apply_freeze(ParameterRegistry& reg, const FreezeSpec& spec) {
    const auto resolved = resolve_selectors(reg, spec);
    const bool immediate = !spec.freeze_at_epoch || *spec.freeze_at_epoch == 0;
    std::vector<std::string> affected;
    for (size_t i = 0; i < spec.selectors.size(); ++i) {
        for (const std::string& name : resolved[i]) {
            Parameter& p = reg.at(name);
            if (spec.selectors[i].init == InitKind::diagonal && p.materialized() &&
                is_weight_role(p.tag.matrix_role)) {
                p.tensor.data() = diagonal_init(p.shape[0], p.shape[1]).data();
            }
            if (immediate) p.set_trainable(false);
            affected.push_back(name);
        }
    }
    return summarize(reg, std::move(affected), !immediate);
}

FreezeReport freeze_at_epoch_hook(ParameterRegistry& reg, const FreezeSpec& spec,
                                  int current_epoch) {
    if (!spec.freeze_at_epoch) {
        throw FreezeError("freeze_at_epoch_hook: spec has no freeze epoch");
    }
    const int target = *spec.freeze_at_epoch;
    FreezeReport rep;
    if (current_epoch < target) {
        return summarize(reg, {}, /*deferred=*/true);
    }
    const auto resolved = resolve_selectors(reg, spec);
    std::vector<std::string> flipped;
    for (const auto& names : resolved) {
        for (const std::string& name : names) {
            Parameter& p = reg.at(name);
            if (p.trainable) {
                p.set_trainable(false);
                flipped.push_back(name);
            }
        }
    }
    rep = summarize(reg, std::move(flipped), /*deferred=*/false);
    if (current_epoch > target && !rep.affected.empty()) {
        rep.warnings.push_back("freeze epoch " + std::to_string(target) +
                               " already passed at epoch " + std::to_string(current_epoch) +
                               "; freezing now");
    }
    return rep;
}

}  // namespace pfrost
