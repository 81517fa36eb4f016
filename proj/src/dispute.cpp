#include "prt/dispute.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

#include "prt/protocol.hpp"
#include "prt/steplog.hpp"

namespace prt {

namespace {

using json = nlohmann::ordered_json;

json bundle_json(const proof_bundle &b) {
    json sib = json::array();
    for (const auto &h : b.siblings) {
        sib.push_back(to_hex(h));
    }
    return {{"index", b.index}, {"leaf", to_hex(b.leaf)}, {"siblings", std::move(sib)}};
}

bool bundle_ok(const proof_bundle &b, const hash &root, std::uint64_t index, unsigned depth) {
    return b.index == index && b.siblings.size() == depth && b.verifies(root);
}

unsigned tree_depth(std::uint64_t intervals) {
    return static_cast<unsigned>(std::countr_zero(intervals)) + 1;
}

const char *side_name(int side) {
    return side == 0 ? "A" : "B";
}

} // namespace

const char *to_string(outcome o) noexcept {
    switch (o) {
        case outcome::decided:
            return "DECIDED";
        case outcome::no_dispute:
            return "NO_DISPUTE";
        case outcome::no_claim:
            return "NO_CLAIM";
    }
    return "UNKNOWN";
}

referee::referee(transport &net, referee_config config, transcript *log, effort_meter *meter) :
    m_net{net},
    m_config{std::move(config)},
    m_log{log},
    m_meter{meter != nullptr ? meter : &m_own_meter} {}

dispute_result referee::finish(dispute_result r) {
    std::sort(r.winners.begin(), r.winners.end());
    verdict_message v{to_string(r.kind), r.final_hash.value_or(hash{}), {}};
    json winners = json::array();
    for (auto p : r.winners) {
        v.winners.push_back(m_config.party_names[p]);
        winners.push_back(m_config.party_names[p]);
    }
    if (m_log != nullptr) {
        m_log->add({{"event", "result"},
                    {"outcome", to_string(r.kind)},
                    {"winners", std::move(winners)},
                    {"final_hash", r.final_hash ? to_hex(*r.final_hash) : ""},
                    {"rounds", r.rounds},
                    {"matches", r.matches.size()}});
    }
    m_net.broadcast(encode(v));
    return r;
}

std::map<std::size_t, hash> referee::query_hashes(const std::vector<std::size_t> &parties, std::uint64_t step) {
    std::vector<outbound> out;
    std::vector<std::uint32_t> seqs;
    for (auto p : parties) {
        seqs.push_back(next_seq());
        out.push_back({p, encode(hash_query{seqs.back(), step})});
    }
    std::map<std::size_t, hash> got;
    m_net.exchange(out, [&](std::size_t i, const frame &f) {
        auto r = decode_hash_reveal(f);
        if (r && r->seq == seqs[i]) {
            got.emplace(parties[i], r->value);
            if (m_log != nullptr) {
                m_log->add({{"event", "hash"},
                            {"party", m_config.party_names[parties[i]]},
                            {"step", step},
                            {"value", to_hex(r->value)}});
            }
        }
        return got.size() == parties.size();
    });
    for (auto p : parties) {
        if (!got.contains(p) && m_log != nullptr) {
            m_log->add({{"event", "timeout"}, {"party", m_config.party_names[p]}, {"step", step}});
        }
    }
    return got;
}

dispute_result referee::two_party() {
    const effort_scope scope{m_meter};
    if (m_config.party_names.size() < 2) {
        throw std::invalid_argument{"two-party dispute needs two parties"};
    }
    dispute_result r;
    r.matches_played.assign(m_config.party_names.size(), 0);
    r.matches_played[0] = r.matches_played[1] = 1;
    const std::uint64_t t = m_config.max_steps;
    if (m_log != nullptr) {
        m_log->add({{"event", "start"},
                    {"mode", "two-party"},
                    {"m0", to_hex(m_config.initial_hash)},
                    {"max_steps", t},
                    {"parties", {m_config.party_names[0], m_config.party_names[1]}}});
    }
    auto finals = query_hashes({0, 1}, t);
    const auto decide = [&](std::size_t winner, const char *reason) {
        if (m_log != nullptr) {
            m_log->add({{"event", "eliminate"}, {"party", m_config.party_names[1 - winner]}, {"reason", reason}});
        }
        r.kind = outcome::decided;
        r.winners = {winner};
        if (finals.contains(winner)) {
            r.final_hash = finals[winner];
        }
        r.rounds = 1;
        return finish(std::move(r));
    };
    if (finals.empty()) {
        return finish(std::move(r));
    }
    if (finals.size() == 1) {
        return decide(finals.begin()->first, "timeout");
    }
    if (finals[0] == finals[1]) {
        r.kind = outcome::no_dispute;
        r.winners = {0, 1};
        r.final_hash = finals[0];
        return finish(std::move(r));
    }
    std::uint64_t lo = 0;
    std::uint64_t hi = t;
    hash n = m_config.initial_hash;
    hash claim_a = finals[0];
    while (hi - lo > 1) {
        const std::uint64_t m = lo + (hi - lo) / 2;
        auto h = query_hashes({0, 1}, m);
        if (h.size() < 2) {
            if (h.empty()) {
                r.winners.clear();
                r.kind = outcome::no_claim;
                return finish(std::move(r));
            }
            return decide(h.begin()->first, "timeout");
        }
        if (h[0] == h[1]) {
            lo = m;
            n = h[0];
        } else {
            hi = m;
            claim_a = h[0];
        }
    }
    const auto seq = next_seq();
    std::optional<step_hash_result> checked;
    const outbound q{0, encode(log_query{seq, lo})};
    m_net.exchange({&q, 1}, [&](std::size_t, const frame &f) {
        auto reply = decode_log_reveal(f);
        if (!reply || reply->seq != seq) {
            return false;
        }
        checked = step_hash(n, reply->log);
        if (m_log != nullptr) {
            m_log->add({{"event", "log"},
                        {"party", m_config.party_names[0]},
                        {"step", lo},
                        {"n", to_hex(n)},
                        {"claim", to_hex(claim_a)},
                        {"log", to_hex(encode_log(reply->log))},
                        {"status", checked->accepted() && *checked->root == claim_a ? "accepted" : "rejected"},
                        {"reason", to_string(checked->reason)}});
        }
        return true;
    });
    match_record rec;
    rec.leaf = hi;
    rec.step = lo;
    rec.winner = checked && checked->accepted() && *checked->root == claim_a ? "A" : "B";
    r.matches.push_back(rec);
    return decide(rec.winner == "A" ? 0 : 1, rec.winner == "A" ? "log_accepted" : "log_rejected");
}

dispute_result referee::linear() {
    const effort_scope scope{m_meter};
    dispute_result r;
    r.matches_played.assign(m_config.party_names.size(), 0);
    const std::uint64_t t = m_config.max_steps;
    std::vector<std::size_t> alive(m_config.party_names.size());
    for (std::size_t i = 0; i < alive.size(); ++i) {
        alive[i] = i;
    }
    if (m_log != nullptr) {
        m_log->add({{"event", "start"},
                    {"mode", "linear"},
                    {"m0", to_hex(m_config.initial_hash)},
                    {"max_steps", t},
                    {"parties", m_config.party_names}});
    }
    const auto keep_replied = [&](const std::map<std::size_t, hash> &got) {
        std::erase_if(alive, [&](std::size_t p) { return !got.contains(p); });
    };
    const auto all_equal = [](const std::map<std::size_t, hash> &got) {
        return std::all_of(got.begin(), got.end(), [&](const auto &kv) { return kv.second == got.begin()->second; });
    };
    for (;;) {
        auto finals = query_hashes(alive, t);
        keep_replied(finals);
        if (alive.empty()) {
            return finish(std::move(r));
        }
        if (all_equal(finals)) {
            r.kind = r.rounds == 0 ? outcome::no_dispute : outcome::decided;
            r.winners = alive;
            r.final_hash = finals.begin()->second;
            return finish(std::move(r));
        }
        ++r.rounds;
        for (auto p : alive) {
            ++r.matches_played[p];
        }
        std::uint64_t lo = 0;
        std::uint64_t hi = t;
        hash n = m_config.initial_hash;
        auto claims = finals;
        while (hi - lo > 1 && alive.size() > 1) {
            const std::uint64_t m = lo + (hi - lo) / 2;
            auto h = query_hashes(alive, m);
            keep_replied(h);
            if (h.empty()) {
                break;
            }
            if (all_equal(h)) {
                lo = m;
                n = h.begin()->second;
            } else {
                hi = m;
                claims = std::move(h);
            }
        }
        if (alive.size() <= 1) {
            continue;
        }
        // Every remaining party must justify its claim at `hi` from the agreed state at `lo`.
        std::vector<outbound> out;
        std::vector<std::uint32_t> seqs;
        for (auto p : alive) {
            seqs.push_back(next_seq());
            out.push_back({p, encode(log_query{seqs.back(), lo})});
        }
        std::vector<std::size_t> justified;
        std::size_t answered = 0;
        m_net.exchange(out, [&](std::size_t i, const frame &f) {
            auto reply = decode_log_reveal(f);
            if (!reply || reply->seq != seqs[i]) {
                return false;
            }
            ++answered;
            const auto p = alive[i];
            auto res = step_hash(n, reply->log);
            const bool ok = res.accepted() && claims.contains(p) && *res.root == claims.at(p);
            if (ok) {
                justified.push_back(p);
            }
            if (m_log != nullptr) {
                m_log->add({{"event", "log"},
                            {"party", m_config.party_names[p]},
                            {"step", lo},
                            {"n", to_hex(n)},
                            {"claim", claims.contains(p) ? to_hex(claims.at(p)) : ""},
                            {"log", to_hex(encode_log(reply->log))},
                            {"status", ok ? "accepted" : "rejected"},
                            {"reason", to_string(res.reason)}});
            }
            return answered == alive.size();
        });
        for (auto p : alive) {
            if (std::find(justified.begin(), justified.end(), p) == justified.end() && m_log != nullptr) {
                m_log->add({{"event", "eliminate"}, {"party", m_config.party_names[p]}, {"step", lo}, {"reason", "log"}});
            }
        }
        match_record rec;
        rec.id = m_next_match++;
        rec.round = r.rounds;
        rec.leaf = hi;
        rec.step = lo;
        rec.winner = justified.empty() ? "none" : "survivors";
        r.matches.push_back(rec);
        std::sort(justified.begin(), justified.end());
        alive = std::move(justified);
    }
}

dispute_result referee::tournament(const stage_config &stages) {
    stages.validate();
    if (stages.max_steps != m_config.max_steps) {
        throw std::invalid_argument{"stage configuration budget differs from the dispute budget"};
    }
    const effort_scope scope{m_meter};
    m_stages = stages;
    dispute_result r;
    r.matches_played.assign(m_config.party_names.size(), 0);
    if (m_log != nullptr) {
        m_log->add({{"event", "start"},
                    {"mode", stages.stages() == 1 ? "tournament" : "multistage"},
                    {"m0", to_hex(m_config.initial_hash)},
                    {"max_steps", m_config.max_steps},
                    {"stages", stages.strides},
                    {"parties", m_config.party_names}});
    }
    std::vector<std::size_t> everyone(m_config.party_names.size());
    for (std::size_t i = 0; i < everyone.size(); ++i) {
        everyone[i] = i;
    }
    const interval iv{0, 0, m_config.max_steps, stages.strides.front()};
    auto teams = collect_teams(iv, everyone, m_config.initial_hash, {});
    if (teams.empty()) {
        return finish(std::move(r));
    }
    if (teams.size() == 1) {
        r.kind = outcome::no_dispute;
        r.winners = teams.front().members;
        r.final_hash = teams.front().claim;
        return finish(std::move(r));
    }
    auto winner = run_bracket(iv, std::move(teams), true, r);
    if (winner) {
        r.kind = outcome::decided;
        r.winners = winner->members;
        r.final_hash = winner->claim;
    }
    return finish(std::move(r));
}

std::vector<referee::team> referee::collect_teams(const interval &iv, const std::vector<std::size_t> &candidates,
                                                  const hash &first, const std::vector<hash> &expected_claims) {
    const std::uint64_t n = iv.span >> iv.stride_log2;
    const unsigned depth = tree_depth(n);
    std::vector<outbound> out;
    std::vector<std::uint32_t> seqs;
    for (auto p : candidates) {
        seqs.push_back(next_seq());
        out.push_back({p, encode(commit_request{seqs.back(), static_cast<std::uint8_t>(iv.stage), iv.start, iv.span,
                                                static_cast<std::uint8_t>(iv.stride_log2)})});
    }
    std::vector<std::optional<commit_reply>> posted(candidates.size());
    std::size_t answered = 0;
    m_net.exchange(out, [&](std::size_t i, const frame &f) {
        auto reply = decode_commit_reply(f);
        if (!reply || reply->seq != seqs[i] || posted[i]) {
            return false;
        }
        ++answered;
        const auto &a = reply->posted;
        const char *reason = nullptr;
        if (a.start != iv.start || a.span != iv.span || a.stride_log2 != iv.stride_log2) {
            reason = "interval_mismatch";
        } else if (!bundle_ok(a.first, a.root, 0, depth) || a.first.leaf != first) {
            reason = "first_leaf";
        } else if (!bundle_ok(reply->last, a.root, n, depth)) {
            reason = "last_leaf";
        } else if (!expected_claims.empty() && reply->last.leaf != expected_claims[i]) {
            reason = "claim_mismatch";
        }
        if (m_log != nullptr) {
            json e{{"event", "commit"},
                   {"stage", iv.stage},
                   {"start", iv.start},
                   {"party", m_config.party_names[candidates[i]]},
                   {"root", to_hex(a.root)},
                   {"first", bundle_json(a.first)},
                   {"last", bundle_json(reply->last)},
                   {"status", reason == nullptr ? "accepted" : "rejected"}};
            if (reason != nullptr) {
                e["reason"] = reason;
            }
            m_log->add(e);
        }
        if (reason == nullptr) {
            posted[i] = std::move(reply);
        }
        return answered == candidates.size();
    });
    std::vector<team> teams;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (!posted[i]) {
            continue;
        }
        const auto &root = posted[i]->posted.root;
        auto it = std::find_if(teams.begin(), teams.end(), [&](const team &t) { return t.root == root; });
        if (it == teams.end()) {
            teams.push_back({root, posted[i]->last.leaf, {}});
            it = teams.end() - 1;
        }
        it->members.push_back(candidates[i]);
    }
    if (m_log != nullptr) {
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            bool replied = false;
            for (const auto &t : teams) {
                replied |= std::find(t.members.begin(), t.members.end(), candidates[i]) != t.members.end();
            }
            if (!replied) {
                m_log->add({{"event", "excluded"},
                            {"stage", iv.stage},
                            {"start", iv.start},
                            {"party", m_config.party_names[candidates[i]]}});
            }
        }
        for (const auto &t : teams) {
            json members = json::array();
            for (auto p : t.members) {
                members.push_back(m_config.party_names[p]);
            }
            m_log->add({{"event", "team"},
                        {"stage", iv.stage},
                        {"start", iv.start},
                        {"root", to_hex(t.root)},
                        {"claim", to_hex(t.claim)},
                        {"members", std::move(members)}});
        }
    }
    return teams;
}

std::optional<referee::team> referee::run_bracket(const interval &iv, std::vector<team> teams, bool outer,
                                                  dispute_result &result) {
    unsigned round = 0;
    while (teams.size() > 1) {
        ++round;
        if (outer) {
            ++result.rounds;
            ++m_meter->rounds;
        }
        std::sort(teams.begin(), teams.end(), [](const team &a, const team &b) { return a.root < b.root; });
        if (m_log != nullptr) {
            m_log->add({{"event", "round"}, {"stage", iv.stage}, {"start", iv.start}, {"round", round}, {"teams", teams.size()}});
        }
        std::vector<team> next;
        std::size_t i = 0;
        if (teams.size() % 2 == 1) {
            if (m_log != nullptr) {
                m_log->add({{"event", "bye"}, {"stage", iv.stage}, {"root", to_hex(teams[0].root)}});
            }
            next.push_back(std::move(teams[0]));
            i = 1;
        }
        for (; i + 1 < teams.size(); i += 2) {
            if (auto w = run_match(iv, teams[i], teams[i + 1], round, result)) {
                next.push_back(std::move(*w));
            }
        }
        teams = std::move(next);
    }
    if (teams.empty()) {
        return std::nullopt;
    }
    return std::move(teams.front());
}

std::optional<referee::team> referee::run_match(const interval &iv, const team &a, const team &b, unsigned round,
                                                dispute_result &result) {
    const std::uint64_t hashes_before = m_meter->hashes;
    std::uint64_t nested_hashes = 0;
    ++m_meter->matches;
    match_record rec;
    rec.id = m_next_match++;
    rec.stage = iv.stage;
    rec.round = round;
    rec.start = iv.start;
    rec.root_a = a.root;
    rec.root_b = b.root;
    const team *sides[2] = {&a, &b};
    for (const auto *t : sides) {
        for (auto p : t->members) {
            ++result.matches_played[p];
        }
    }
    if (m_log != nullptr) {
        m_log->add({{"event", "match"},
                    {"match", rec.id},
                    {"stage", iv.stage},
                    {"start", iv.start},
                    {"round", round},
                    {"a", to_hex(a.root)},
                    {"b", to_hex(b.root)}});
    }

    const auto done = [&](int winner, const char *reason) -> std::optional<team> {
        rec.winner = winner < 0 ? "none" : side_name(winner);
        rec.referee_hashes = m_meter->hashes - hashes_before - nested_hashes;
        if (m_log != nullptr) {
            for (int s = 0; s < 2; ++s) {
                if (s != winner) {
                    m_log->add({{"event", "eliminate"},
                                {"match", rec.id},
                                {"team", side_name(s)},
                                {"root", to_hex(sides[s]->root)},
                                {"reason", reason}});
                }
            }
            json e{{"event", "match_result"}, {"match", rec.id}, {"winner", rec.winner}, {"leaf", rec.leaf}};
            if (rec.step) {
                e["step"] = *rec.step;
            }
            e["referee_hashes"] = rec.referee_hashes;
            m_log->add(e);
        }
        result.matches.push_back(rec);
        if (winner < 0) {
            return std::nullopt;
        }
        return *sides[winner];
    };

    // Sends one query per member of both teams; keeps the first acceptable
    // reply from each team and stops once both teams have one.
    const auto ask_both = [&]<typename T>(auto make_query, auto accept, std::optional<T> (&got)[2]) {
        std::vector<outbound> out;
        std::vector<std::uint32_t> seqs;
        std::vector<int> side_of;
        for (int s = 0; s < 2; ++s) {
            for (auto p : sides[s]->members) {
                seqs.push_back(next_seq());
                side_of.push_back(s);
                out.push_back({p, make_query(seqs.back())});
            }
        }
        m_net.exchange(out, [&](std::size_t i, const frame &f) {
            const int s = side_of[i];
            if (got[s] || frame_seq(f) != seqs[i]) {
                return false;
            }
            got[s] = accept(s, out[i].party, f);
            return got[0].has_value() && got[1].has_value();
        });
    };

    const std::uint64_t n = iv.span >> iv.stride_log2;
    const unsigned depth = tree_depth(n);
    hash label[2] = {a.root, b.root};
    std::uint64_t index = 0;
    for (unsigned level = 0; level + 1 < depth; ++level) {
        std::optional<std::pair<hash, hash>> kids[2];
        ask_both(
            [&](std::uint32_t seq) {
                return encode(children_query{seq, static_cast<std::uint8_t>(iv.stage), iv.start,
                                             static_cast<std::uint8_t>(level), index});
            },
            [&](int s, std::size_t party, const frame &f) -> std::optional<std::pair<hash, hash>> {
                auto r = decode_children_reveal(f);
                const bool ok = r && hash_pair(r->left, r->right) == label[s];
                if (m_log != nullptr) {
                    json e{{"event", "children"}, {"match", rec.id},    {"team", side_name(s)},
                           {"party", m_config.party_names[party]},    {"level", level},
                           {"index", index},        {"parent", to_hex(label[s])}};
                    if (r) {
                        e["left"] = to_hex(r->left);
                        e["right"] = to_hex(r->right);
                    }
                    e["status"] = ok ? "accepted" : "rejected";
                    m_log->add(e);
                }
                if (!ok) {
                    return std::nullopt;
                }
                return std::make_pair(r->left, r->right);
            },
            kids);
        if (!kids[0] && !kids[1]) {
            return done(-1, "timeout");
        }
        if (!kids[0] || !kids[1]) {
            return done(kids[0] ? 0 : 1, "timeout");
        }
        if (kids[0]->first == kids[1]->first) {
            index = 2 * index + 1;
            label[0] = kids[0]->second;
            label[1] = kids[1]->second;
        } else {
            index = 2 * index;
            label[0] = kids[0]->first;
            label[1] = kids[1]->first;
        }
    }

    const auto leaves = [&](std::uint64_t leaf, std::optional<hash> (&got)[2]) {
        ask_both(
            [&](std::uint32_t seq) {
                return encode(leaf_query{seq, static_cast<std::uint8_t>(iv.stage), iv.start, leaf});
            },
            [&](int s, std::size_t party, const frame &f) -> std::optional<hash> {
                auto r = decode_leaf_reveal(f);
                const bool ok = r && bundle_ok(r->bundle, sides[s]->root, leaf, depth);
                if (m_log != nullptr) {
                    json e{{"event", "leaf"},
                           {"match", rec.id},
                           {"team", side_name(s)},
                           {"party", m_config.party_names[party]},
                           {"root", to_hex(sides[s]->root)},
                           {"index", leaf}};
                    if (r) {
                        e["bundle"] = bundle_json(r->bundle);
                    }
                    e["status"] = ok ? "accepted" : "rejected";
                    m_log->add(e);
                }
                if (!ok) {
                    return std::nullopt;
                }
                return r->bundle.leaf;
            },
            got);
    };

    // Leaf-level labels: the left child of the final node decides whether the
    // divergence is at 2c or 2c + 1.
    std::optional<hash> left[2];
    leaves(2 * index, left);
    if (!left[0] || !left[1]) {
        return done(left[0] ? 0 : (left[1] ? 1 : -1), "timeout");
    }
    std::uint64_t at = 0;
    hash agreed{};
    hash claim[2];
    if (*left[0] == *left[1]) {
        at = 2 * index + 1;
        agreed = *left[0];
        std::optional<hash> right[2];
        leaves(at, right);
        if (!right[0] || !right[1]) {
            return done(right[0] ? 0 : (right[1] ? 1 : -1), "timeout");
        }
        claim[0] = *right[0];
        claim[1] = *right[1];
    } else {
        at = 2 * index;
        claim[0] = *left[0];
        claim[1] = *left[1];
        if (at == 0) {
            // Both teams proved leaf 0 at admission; a disagreement here is a collision.
            return done(-1, "inconsistent");
        }
        std::optional<hash> before[2];
        leaves(at - 1, before);
        if (!before[0] || !before[1]) {
            return done(before[0] ? 0 : (before[1] ? 1 : -1), "timeout");
        }
        if (*before[0] != *before[1]) {
            return done(-1, "inconsistent");
        }
        agreed = *before[0];
    }
    rec.leaf = at;
    if (claim[0] == claim[1]) {
        return done(-1, "inconsistent");
    }

    if (at > n) {
        // Past the interval end every leaf must repeat the endpoint.
        const int w = claim[0] == agreed ? 0 : (claim[1] == agreed ? 1 : -1);
        return done(w, "padding");
    }

    if (iv.stride_log2 > 0) {
        if (m_log != nullptr) {
            m_log->add({{"event", "nested"},
                        {"match", rec.id},
                        {"leaf", at},
                        {"n", to_hex(agreed)},
                        {"claim_a", to_hex(claim[0])},
                        {"claim_b", to_hex(claim[1])}});
        }
        rec.nested = true;
        const auto before = m_meter->hashes;
        const team ta{a.root, claim[0], a.members};
        const team tb{b.root, claim[1], b.members};
        auto inner = nested(iv, at, agreed, ta, tb, rec.id, result);
        nested_hashes = m_meter->hashes - before;
        if (!inner) {
            return done(-1, "inner_bracket_empty");
        }
        const int w = inner->claim == claim[0] ? 0 : 1;
        auto r = done(w, "inner_bracket_lost");
        r->members = inner->members;
        return r;
    }

    const std::uint64_t step = iv.start + (at - 1);
    rec.step = step;
    std::vector<outbound> out;
    std::vector<std::uint32_t> seqs;
    std::vector<int> side_of;
    for (int s = 0; s < 2; ++s) {
        for (auto p : sides[s]->members) {
            seqs.push_back(next_seq());
            side_of.push_back(s);
            out.push_back({p, encode(log_query{seqs.back(), step})});
        }
    }
    int winner = -1;
    m_net.exchange(out, [&](std::size_t i, const frame &f) {
        auto r = decode_log_reveal(f);
        if (!r || r->seq != seqs[i]) {
            return false;
        }
        const int s = side_of[i];
        auto res = step_hash(agreed, r->log);
        const bool ok = res.accepted() && *res.root == claim[s];
        if (m_log != nullptr) {
            m_log->add({{"event", "log"},
                        {"match", rec.id},
                        {"team", side_name(s)},
                        {"party", m_config.party_names[out[i].party]},
                        {"step", step},
                        {"n", to_hex(agreed)},
                        {"claim", to_hex(claim[s])},
                        {"log", to_hex(encode_log(r->log))},
                        {"status", ok ? "accepted" : "rejected"},
                        {"reason", to_string(res.reason)}});
        }
        if (ok) {
            winner = s;
        }
        return ok;
    });
    return done(winner, "log");
}

std::optional<referee::team> referee::nested(const interval &iv, std::uint64_t leaf, const hash &n, const team &a,
                                             const team &b, unsigned match_id, dispute_result &result) {
    const interval inner{iv.stage + 1, iv.start + ((leaf - 1) << iv.stride_log2), std::uint64_t{1} << iv.stride_log2,
                         m_stages.strides.at(iv.stage + 1)};
    if (m_log != nullptr) {
        m_log->add({{"event", "stage"},
                    {"match", match_id},
                    {"stage", inner.stage},
                    {"start", inner.start},
                    {"span", inner.span},
                    {"stride", inner.stride_log2}});
    }
    std::vector<std::size_t> candidates;
    std::vector<hash> claims;
    for (const team *t : {&a, &b}) {
        for (auto p : t->members) {
            candidates.push_back(p);
            claims.push_back(t->claim);
        }
    }
    auto teams = collect_teams(inner, candidates, n, claims);
    return run_bracket(inner, std::move(teams), false, result);
}

} // namespace prt
