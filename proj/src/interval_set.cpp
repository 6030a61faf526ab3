#include "mcl/interval_set.hpp"

#include <algorithm>

namespace mcl {

bool iv_valid(const FlagIv& v) {
    if (v.lo < v.hi) return true;
    return v.lo == v.hi && v.lc && v.hc;
}

bool iv_contains_point(const FlagIv& v, const Rat& x) {
    if (x < v.lo || x > v.hi) return false;
    if (x == v.lo && !v.lc) return false;
    if (x == v.hi && !v.hc) return false;
    return true;
}

bool iv_subset(const FlagIv& inner, const FlagIv& outer) {
    bool lo_ok = outer.lo < inner.lo || (outer.lo == inner.lo && (outer.lc || !inner.lc));
    bool hi_ok = outer.hi > inner.hi || (outer.hi == inner.hi && (outer.hc || !inner.hc));
    return lo_ok && hi_ok;
}

std::optional<FlagIv> iv_intersect(const FlagIv& a, const FlagIv& b) {
    FlagIv r;
    if (a.lo > b.lo) {
        r.lo = a.lo;
        r.lc = a.lc;
    } else if (b.lo > a.lo) {
        r.lo = b.lo;
        r.lc = b.lc;
    } else {
        r.lo = a.lo;
        r.lc = a.lc && b.lc;
    }
    if (a.hi < b.hi) {
        r.hi = a.hi;
        r.hc = a.hc;
    } else if (b.hi < a.hi) {
        r.hi = b.hi;
        r.hc = b.hc;
    } else {
        r.hi = a.hi;
        r.hc = a.hc && b.hc;
    }
    if (!iv_valid(r)) return std::nullopt;
    return r;
}

std::vector<FlagIv> iv_subtract(const FlagIv& a, const FlagIv& b) {
    auto cut = iv_intersect(a, b);
    if (!cut) return {a};
    std::vector<FlagIv> out;
    FlagIv left{a.lo, cut->lo, a.lc, !cut->lc};
    if (left.lo < left.hi || (left.lo == left.hi && left.lc && left.hc)) out.push_back(left);
    FlagIv right{cut->hi, a.hi, !cut->hc, a.hc};
    if (right.lo < right.hi || (right.lo == right.hi && right.lc && right.hc)) out.push_back(right);
    return out;
}

bool iv_joinable(const FlagIv& a, const FlagIv& b) {
    const FlagIv& l = a.lo <= b.lo ? a : b;
    const FlagIv& r = a.lo <= b.lo ? b : a;
    if (l.hi > r.lo) return true;
    if (l.hi == r.lo) return l.hc || r.lc;
    return false;
}

IvSet ivset_normalize(std::vector<FlagIv> ivs) {
    std::vector<FlagIv> in;
    for (const auto& v : ivs)
        if (iv_valid(v)) in.push_back(v);
    std::sort(in.begin(), in.end(), [](const FlagIv& x, const FlagIv& y) {
        if (x.lo != y.lo) return x.lo < y.lo;
        if (x.lc != y.lc) return x.lc;  // closed end first
        if (x.hi != y.hi) return x.hi < y.hi;
        return x.hc && !y.hc;
    });
    IvSet out;
    for (const auto& v : in) {
        if (!out.empty() && iv_joinable(out.back(), v)) {
            FlagIv& last = out.back();
            if (v.lo == last.lo) last.lc = last.lc || v.lc;
            if (v.hi > last.hi) {
                last.hi = v.hi;
                last.hc = v.hc;
            } else if (v.hi == last.hi) {
                last.hc = last.hc || v.hc;
            }
        } else {
            out.push_back(v);
        }
    }
    return out;
}

IvSet ivset_union(const IvSet& a, const IvSet& b) {
    std::vector<FlagIv> all(a.begin(), a.end());
    all.insert(all.end(), b.begin(), b.end());
    return ivset_normalize(std::move(all));
}

IvSet ivset_intersect(const IvSet& a, const IvSet& b) {
    std::vector<FlagIv> out;
    for (const auto& x : a)
        for (const auto& y : b)
            if (auto c = iv_intersect(x, y)) out.push_back(*c);
    return ivset_normalize(std::move(out));
}

IvSet ivset_subtract(const IvSet& a, const IvSet& b) {
    std::vector<FlagIv> cur(a.begin(), a.end());
    for (const auto& y : b) {
        std::vector<FlagIv> next;
        for (const auto& x : cur) {
            auto pieces = iv_subtract(x, y);
            next.insert(next.end(), pieces.begin(), pieces.end());
        }
        cur = std::move(next);
    }
    return ivset_normalize(std::move(cur));
}

IvSet ivset_sym_diff(const IvSet& a, const IvSet& b) {
    return ivset_union(ivset_subtract(a, b), ivset_subtract(b, a));
}

bool ivset_contains_point(const IvSet& s, const Rat& x) {
    for (const auto& v : s)
        if (iv_contains_point(v, x)) return true;
    return false;
}

bool ivset_covers(const IvSet& outer, const IvSet& inner) {
    return ivset_subtract(inner, outer).empty();
}

bool ivset_intersects(const IvSet& a, const IvSet& b) {
    for (const auto& x : a)
        for (const auto& y : b)
            if (iv_intersect(x, y)) return true;
    return false;
}

Rat ivset_length(const IvSet& s) {
    Rat total = 0;
    for (const auto& v : s) total += v.hi - v.lo;
    return total;
}

}  // namespace mcl
