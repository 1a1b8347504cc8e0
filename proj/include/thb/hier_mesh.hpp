#pragma once

#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "thb/tensor_space.hpp"

namespace thb {

/// Admissibility class of Definition-level gradings: functions alive on any
/// element span at most m successive levels; kind selects the H or T variant.
struct AdmissibilityClass {
    char kind = 'T';  // 'T' or 'H'
    int m = 2;
    AdmissibilityClass() = default;
    AdmissibilityClass(char k, int mm) : kind(k), m(mm) {
        if (kind != 'T' && kind != 'H') throw std::invalid_argument("AdmissibilityClass: kind must be T or H");
        if (m < 2) throw std::invalid_argument("AdmissibilityClass: m must be >= 2");
    }
};

/// Hierarchical mesh: dyadically nested tensor grids G^0..G^L with closed
/// subdomains Omega^0 >= Omega^1 >= ... stored as per-level element sets.
/// Active elements of level l are those in Omega^l not covered by Omega^{l+1}.
class HierarchicalMesh {
public:
    HierarchicalMesh() = default;

    explicit HierarchicalMesh(TensorSpace coarse) {
        levels_.push_back(std::move(coarse));
        omega_.emplace_back();
        omega_[0].resize(levels_[0].num_elements());
        for (long e = 0; e < levels_[0].num_elements(); ++e) omega_[0][e] = e;
        rebuild_active();
    }

    HierarchicalMesh(std::vector<TensorSpace> levels, std::vector<std::vector<long>> omega)
        : levels_(std::move(levels)), omega_(std::move(omega)) {
        for (auto& o : omega_) {
            std::sort(o.begin(), o.end());
            o.erase(std::unique(o.begin(), o.end()), o.end());
        }
        rebuild_active();
    }

    int dim() const { return levels_.front().dim(); }
    int num_levels() const { return static_cast<int>(levels_.size()); }
    int finest_level() const { return num_levels() - 1; }
    const TensorSpace& level(int l) const { return levels_.at(l); }
    const std::vector<long>& omega(int l) const { return omega_.at(l); }
    const std::vector<long>& active(int l) const { return active_.at(l); }
    double level_mesh_size(int l) const { return levels_.at(l).mesh_size(); }

    long num_active_elements() const {
        long n = 0;
        for (auto& a : active_) n += static_cast<long>(a.size());
        return n;
    }

    bool in_omega(int l, long e) const {
        if (l < 0 || l >= num_levels()) return false;
        return std::binary_search(omega_[l].begin(), omega_[l].end(), e);
    }
    bool is_active(int l, long e) const {
        if (l < 0 || l >= num_levels()) return false;
        return std::binary_search(active_[l].begin(), active_[l].end(), e);
    }

    Index parent_index(int l, const Index& e) const {
        Index p{0, 0, 0};
        for (int k = 0; k < dim(); ++k) p[k] = e[k] >> 1;
        (void)l;
        return p;
    }
    Index ancestor_index(int l, const Index& e, int k_level) const {
        Index a{0, 0, 0};
        const int shift = l - k_level;
        for (int k = 0; k < dim(); ++k) a[k] = e[k] >> shift;
        return a;
    }
    IndexBox children_box(const Index& e) const {
        IndexBox b;
        for (int k = 0; k < dim(); ++k) {
            b.lo[k] = 2 * e[k];
            b.hi[k] = 2 * e[k] + 1;
        }
        return b;
    }

    /// Multilevel support extension S(Q, k): the support extension of Q's
    /// level-k ancestor, returned as a level-k element box.
    IndexBox multilevel_support_extension(int l, const Index& e, int k_level) const {
        if (k_level < 0 || k_level > l)
            throw std::invalid_argument("multilevel_support_extension: need 0 <= k <= level(Q)");
        Index a = ancestor_index(l, e, k_level);
        return levels_[k_level].support_extension(a);
    }

    /// Auxiliary subdomain omega^l_H or omega^l_T as a sorted element set.
    std::vector<long> aux_domain(int l, char kind) const {
        std::vector<long> out;
        const TensorSpace& sp = levels_.at(l);
        for (long eid : omega_[l]) {
            Index e = sp.element_index(eid);
            if (aux_contains(l, e, kind)) out.push_back(eid);
        }
        return out;
    }

    bool is_strictly_admissible(const AdmissibilityClass& cls) const {
        for (int l = cls.m; l <= finest_level(); ++l) {
            const int j = l - cls.m + 1;
            std::unordered_set<long> checked;
            const TensorSpace& spj = levels_[j];
            for (long eid : omega_[l]) {
                Index a = ancestor_index(l, levels_[l].element_index(eid), j);
                long aid = spj.element_id(a);
                if (!checked.insert(aid).second) continue;
                if (!aux_contains(j, a, cls.kind)) return false;
            }
        }
        return true;
    }

    /// Adds the 2^d children of every marked active element; appends a new
    /// finest level when needed. marked[l] lists level-l element ids.
    HierarchicalMesh refine_raw(const std::vector<std::vector<long>>& marked) const {
        for (std::size_t l = 0; l < marked.size(); ++l)
            for (long e : marked[l])
                if (!is_active(static_cast<int>(l), e))
                    throw std::invalid_argument("refine_raw: marked element is not active");
        std::vector<TensorSpace> levels = levels_;
        std::vector<std::vector<long>> omega = omega_;
        for (std::size_t l = 0; l < marked.size(); ++l) {
            if (marked[l].empty()) continue;
            if (static_cast<int>(l) + 1 == static_cast<int>(levels.size())) {
                levels.push_back(dyadic_refine(levels.back()));
                omega.emplace_back();
            }
            const TensorSpace& sp = levels[l];
            const TensorSpace& spf = levels[l + 1];
            for (long eid : marked[l]) {
                IndexBox cb = children_box(sp.element_index(eid));
                for_each_in_box(dim(), cb, [&](const Index& c) { omega[l + 1].push_back(spf.element_id(c)); });
            }
        }
        return HierarchicalMesh(std::move(levels), std::move(omega));
    }

    /// Admissible refinement: closes the marked set over the (T or H)
    /// neighborhoods recursively, then runs extra sweeps until the strict
    /// admissibility check passes.
    HierarchicalMesh admissible_refine(const std::vector<std::vector<long>>& marked,
                                       const AdmissibilityClass& cls) const {
        for (std::size_t l = 0; l < marked.size(); ++l)
            for (long e : marked[l])
                if (!is_active(static_cast<int>(l), e))
                    throw std::invalid_argument("admissible_refine: marked element is not active");
        Work w;
        w.levels = levels_;
        w.omega.resize(omega_.size());
        for (std::size_t l = 0; l < omega_.size(); ++l)
            w.omega[l].insert(omega_[l].begin(), omega_[l].end());
        for (std::size_t l = 0; l < marked.size(); ++l)
            for (long e : marked[l]) refine_rec(w, static_cast<int>(l), e, cls);

        HierarchicalMesh out = w.to_mesh();
        int guard = 0;
        while (!out.is_strictly_admissible(cls)) {
            if (++guard > 64) throw std::runtime_error("admissible_refine: closure sweeps did not terminate");
            closure_sweep(w, cls);
            out = w.to_mesh();
        }
        return out;
    }

    /// Intermediate mesh Q^k: levels 0..k with the same subdomains.
    HierarchicalMesh truncated_to(int k) const {
        std::vector<TensorSpace> levels(levels_.begin(), levels_.begin() + k + 1);
        std::vector<std::vector<long>> omega(omega_.begin(), omega_.begin() + k + 1);
        return HierarchicalMesh(std::move(levels), std::move(omega));
    }

    /// Nestedness, sibling-completeness, dyadic mesh sizes, and the active
    /// partition of the domain. Throws on violation.
    void check_invariants() const {
        for (int l = 1; l < num_levels(); ++l) {
            for (long eid : omega_[l]) {
                Index e = levels_[l].element_index(eid);
                Index p = parent_index(l, e);
                if (!in_omega(l - 1, levels_[l - 1].element_id(p)))
                    throw std::runtime_error("mesh invariant: omega nestedness violated");
            }
        }
        double total = 0.0;
        for (int l = 0; l < num_levels(); ++l)
            for (long eid : active_[l]) total += levels_[l].element_measure(levels_[l].element_index(eid));
        if (std::abs(total - 1.0) > 1e-12)
            throw std::runtime_error("mesh invariant: active elements do not partition the domain");
        for (int l = 1; l < num_levels(); ++l) {
            double expect = std::ldexp(levels_[0].mesh_size(), -l);
            if (std::abs(levels_[l].mesh_size() - expect) > 1e-14)
                throw std::runtime_error("mesh invariant: mesh sizes are not dyadic");
        }
    }

    void export_text(std::ostream& os) const {
        const int d = dim();
        os.precision(17);
        for (int l = 0; l < num_levels(); ++l) {
            const TensorSpace& sp = levels_[l];
            for (long eid : active_[l]) {
                Index e = sp.element_index(eid);
                Point lo, hi;
                sp.element_bounds(e, lo, hi);
                os << l;
                for (int k = 0; k < d; ++k) os << ' ' << e[k];
                for (int k = 0; k < d; ++k) os << ' ' << lo[k] << ' ' << hi[k];
                os << '\n';
            }
        }
    }

    /// Rebuilds a mesh from the export format; the degree is not part of the
    /// format and must be supplied.
    static HierarchicalMesh import_text(std::istream& is, int degree) {
        struct Row {
            int level;
            Index e;
        };
        std::vector<Row> rows;
        int dim = 0, max_level = 0;
        std::array<int, max_dim> n0{1, 1, 1};
        std::string line;
        while (std::getline(is, line)) {
            if (line.empty()) continue;
            std::istringstream ls(line);
            std::vector<double> tok;
            double v;
            while (ls >> v) tok.push_back(v);
            if (tok.size() == 4) dim = 1;
            else if (tok.size() == 7) dim = 2;
            else if (tok.size() == 10) dim = 3;
            else throw std::invalid_argument("import_text: malformed mesh line");
            Row r;
            r.level = static_cast<int>(tok[0]);
            max_level = std::max(max_level, r.level);
            r.e = {0, 0, 0};
            for (int k = 0; k < dim; ++k) r.e[k] = static_cast<long>(tok[1 + k]);
            for (int k = 0; k < dim; ++k) {
                double width = tok[1 + dim + 2 * k + 1] - tok[1 + dim + 2 * k];
                n0[k] = static_cast<int>(std::lround(1.0 / (width * std::ldexp(1.0, r.level))));
            }
            rows.push_back(r);
        }
        if (rows.empty()) throw std::invalid_argument("import_text: empty mesh file");
        std::vector<TensorSpace> levels;
        levels.push_back(uniform_tensor_space(dim, {degree, degree, degree}, n0));
        for (int l = 1; l <= max_level; ++l) levels.push_back(dyadic_refine(levels.back()));
        // omega[l] = active[l] union parents of omega[l+1]
        std::vector<std::vector<long>> omega(levels.size());
        std::vector<std::vector<long>> act(levels.size());
        for (const Row& r : rows) act[r.level].push_back(levels[r.level].element_id(r.e));
        for (int l = max_level; l >= 0; --l) {
            omega[l] = act[l];
            if (l + 1 <= max_level) {
                std::unordered_set<long> parents;
                for (long eid : omega[l + 1]) {
                    Index e = levels[l + 1].element_index(eid);
                    Index p{0, 0, 0};
                    for (int k = 0; k < dim; ++k) p[k] = e[k] >> 1;
                    parents.insert(levels[l].element_id(p));
                }
                omega[l].insert(omega[l].end(), parents.begin(), parents.end());
            }
        }
        HierarchicalMesh mesh(std::move(levels), std::move(omega));
        mesh.check_invariants();
        return mesh;
    }

private:
    struct Work {
        std::vector<TensorSpace> levels;
        std::vector<std::unordered_set<long>> omega;

        bool in_omega(int l, long e) const {
            return l >= 0 && l < static_cast<int>(omega.size()) && omega[l].count(e) > 0;
        }
        bool covered(int l, const Index& e) const {
            if (l + 1 >= static_cast<int>(omega.size())) return false;
            Index c{2 * e[0], 2 * e[1], 2 * e[2]};
            return omega[l + 1].count(levels[l + 1].element_id(c)) > 0;
        }
        bool is_active(int l, long eid) const {
            if (!in_omega(l, eid)) return false;
            return !covered(l, levels[l].element_index(eid));
        }
        void subdivide(int l, long eid) {
            if (l + 1 == static_cast<int>(levels.size())) {
                levels.push_back(dyadic_refine(levels.back()));
                omega.emplace_back();
            }
            Index e = levels[l].element_index(eid);
            const int d = levels[l].dim();
            IndexBox cb;
            for (int k = 0; k < d; ++k) {
                cb.lo[k] = 2 * e[k];
                cb.hi[k] = 2 * e[k] + 1;
            }
            for_each_in_box(d, cb, [&](const Index& c) { omega[l + 1].insert(levels[l + 1].element_id(c)); });
        }
        HierarchicalMesh to_mesh() const {
            std::vector<std::vector<long>> om(omega.size());
            for (std::size_t l = 0; l < omega.size(); ++l) om[l].assign(omega[l].begin(), omega[l].end());
            return HierarchicalMesh(levels, std::move(om));
        }
    };

    /// omega^l_kind membership of a single level-l element.
    bool aux_contains(int l, const Index& e, char kind) const {
        if (kind == 'T') {
            IndexBox ext = levels_[l].support_extension(e);
            bool ok = true;
            for_each_in_box(dim(), ext, [&](const Index& s) {
                if (ok && !in_omega(l, levels_[l].element_id(s))) ok = false;
            });
            return ok;
        }
        // H variant: S(Q, l-1) subset of Omega^l, i.e. all children of each
        // extension element of the parent are in omega[l]. l = 0 falls back
        // to the T criterion (S(Q,-1) read as S(Q,0)).
        if (l == 0) return aux_contains(0, e, 'T');
        Index par = parent_index(l, e);
        IndexBox ext = levels_[l - 1].support_extension(par);
        bool ok = true;
        for_each_in_box(dim(), ext, [&](const Index& s) {
            if (!ok) return;
            IndexBox cb;
            for (int k = 0; k < dim(); ++k) {
                cb.lo[k] = 2 * s[k];
                cb.hi[k] = 2 * s[k] + 1;
            }
            for_each_in_box(dim(), cb, [&](const Index& c) {
                if (ok && !in_omega(l, levels_[l].element_id(c))) ok = false;
            });
        });
        return ok;
    }

    void refine_rec(Work& w, int l, long eid, const AdmissibilityClass& cls) const {
        if (!w.is_active(l, eid)) return;
        const int j = l - cls.m + 1;
        if (j >= 0) {
            const int d = w.levels[l].dim();
            Index e = w.levels[l].element_index(eid);
            Index a{0, 0, 0};
            for (int k = 0; k < d; ++k) a[k] = e[k] >> (l - j);
            std::vector<long> neighbors;
            if (cls.kind == 'T') {
                IndexBox ext = w.levels[j].support_extension(a);
                for_each_in_box(d, ext, [&](const Index& s) {
                    long sid = w.levels[j].element_id(s);
                    if (w.is_active(j, sid)) neighbors.push_back(sid);
                });
            } else {
                // elements of level j meeting S(Q, j+1): parents of the
                // level-(j+1) extension of the level-(j+1) ancestor
                if (j + 1 <= l) {
                    Index a1{0, 0, 0};
                    for (int k = 0; k < d; ++k) a1[k] = e[k] >> (l - j - 1);
                    IndexBox ext = w.levels[j + 1].support_extension(a1);
                    std::unordered_set<long> par;
                    for_each_in_box(d, ext, [&](const Index& s) {
                        Index p{0, 0, 0};
                        for (int k = 0; k < d; ++k) p[k] = s[k] >> 1;
                        par.insert(w.levels[j].element_id(p));
                    });
                    for (long sid : par)
                        if (w.is_active(j, sid)) neighbors.push_back(sid);
                }
            }
            for (long sid : neighbors) refine_rec(w, j, sid, cls);
        }
        if (w.is_active(l, eid)) w.subdivide(l, eid);
    }

    /// One corrective sweep: refine the active ancestors of any extension
    /// element missing from the omega the strict check requires.
    void closure_sweep(Work& w, const AdmissibilityClass& cls) const {
        HierarchicalMesh snap = w.to_mesh();
        for (int l = cls.m; l <= snap.finest_level(); ++l) {
            const int j = l - cls.m + 1;
            for (long eid : snap.omega_[l]) {
                Index a = snap.ancestor_index(l, snap.levels_[l].element_index(eid), j);
                if (snap.aux_contains(j, a, cls.kind)) continue;
                IndexBox ext = (cls.kind == 'T')
                                   ? snap.levels_[j].support_extension(a)
                                   : snap.levels_[j - 1].support_extension(snap.parent_index(j, a));
                const int ext_level = (cls.kind == 'T') ? j : j - 1;
                for_each_in_box(dim(), ext, [&](const Index& s) {
                    // T: s itself must lie in omega[j]; H: s must be covered by
                    // omega[j]. Refine the active element containing s unless
                    // the requirement is already met.
                    for (int k = ext_level; k >= 0; --k) {
                        Index anc{0, 0, 0};
                        for (int c = 0; c < dim(); ++c) anc[c] = s[c] >> (ext_level - k);
                        long aid = w.levels[k].element_id(anc);
                        if (w.is_active(k, aid)) {
                            if (cls.kind == 'H' || k < ext_level) w.subdivide(k, aid);
                            break;
                        }
                    }
                });
            }
        }
    }

    void rebuild_active() {
        if (levels_.empty()) return;
        while (omega_.size() < levels_.size()) omega_.emplace_back();
        // drop empty finest levels
        while (levels_.size() > 1 && omega_.back().empty()) {
            levels_.pop_back();
            omega_.pop_back();
        }
        active_.assign(levels_.size(), {});
        for (int l = 0; l < num_levels(); ++l) {
            const TensorSpace& sp = levels_[l];
            for (long eid : omega_[l]) {
                Index e = sp.element_index(eid);
                bool cov = false;
                if (l + 1 < num_levels()) {
                    IndexBox cb = children_box(e);
                    long present = 0;
                    for_each_in_box(dim(), cb, [&](const Index& c) {
                        if (in_omega(l + 1, levels_[l + 1].element_id(c))) ++present;
                    });
                    if (present != 0 && present != (1 << dim()))
                        throw std::runtime_error("mesh invariant: partial sibling group in omega");
                    cov = present == (1 << dim());
                }
                if (!cov) active_[l].push_back(eid);
            }
        }
    }

    std::vector<TensorSpace> levels_;
    std::vector<std::vector<long>> omega_;
    std::vector<std::vector<long>> active_;
};

}  // namespace thb
