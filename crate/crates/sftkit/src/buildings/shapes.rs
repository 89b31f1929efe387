//! Abstract degeneration shapes and the exhaustive enumerator.
//!
//! A shape records only what survives of a building after forgetting all
//! geometry: the leveled tree of components with their topological types and
//! Fredholm indices, and the parity and admissible multiplicities of every
//! breaking orbit.  Levels coincide with tree depth because breakings only
//! connect adjacent levels.
//!
//! The search enumerates rooted trees under the configured bounds and keeps
//! a shape when
//!
//! * component indices add up to the total index, with the main component
//!   nonnegative and every nontrivial lower component of index at least 1;
//! * end parities are consistent with the index relation
//!   `2 c_N = ind - 2 + #Gamma_0` at every component;
//! * the normal-Chern budget closes (all-even breakings with `c_N(main) =
//!   0`, or an odd-ends main cylinder with `c_N(main) = -1`);
//! * the intersection lower bound is nonpositive;
//! * every breaking admits a non-`Forbidden` realization.
//!
//! Kept shapes are rechecked by materializing a concrete building and
//! running it through the level-zero machinery.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};

use super::{
    classify_embedded_breaking, match_templates, Breaking, BreakingClass, Building, BuildingError,
    BuildingType, Classification, Component, ComponentRef, SkelBreak, SkelComp, Skeleton,
};
use crate::curves::{Puncture, PuncturedCurve, PunctureSign};
use crate::orbits::{OrbitClass, OrbitInstance};

/// Configurable limits for the degeneration search.
#[derive(Debug, Clone)]
pub struct SearchBounds {
    /// Total number of levels including the main one.
    pub max_levels: usize,
    pub max_components_per_level: usize,
    pub max_multiplicity: u64,
    pub max_negative_punctures: usize,
    /// Abort threshold on the number of tree nodes generated.
    pub node_budget: usize,
}

impl Default for SearchBounds {
    fn default() -> Self {
        SearchBounds {
            max_levels: 4,
            max_components_per_level: 4,
            max_multiplicity: 2,
            max_negative_punctures: 3,
            node_budget: 200_000,
        }
    }
}

/// Parity of a breaking orbit together with the multiplicities that admit a
/// non-`Forbidden` realization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShapeBreaking {
    pub parity: u8,
    pub multiplicities: Vec<u64>,
}

/// One component of a shape; `children` are the components hanging below its
/// negative punctures, labelled by their breaking data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShapeNode {
    pub trivial: bool,
    pub index: i64,
    pub children: Vec<(ShapeBreaking, ShapeNode)>,
}

/// An abstract admissible degeneration of a plane of the given total index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuildingShape {
    pub total_index: i64,
    /// Parity of the limit orbit at the top, forced by the total index.
    pub root_parity: u8,
    pub root: ShapeNode,
}

impl ShapeNode {
    fn canonical(&self) -> String {
        let mut children: Vec<String> = self
            .children
            .iter()
            .map(|(b, c)| {
                let ms: Vec<String> = b.multiplicities.iter().map(|m| m.to_string()).collect();
                format!("e(p{},m{{{}}})>{}", b.parity, ms.join(","), c.canonical())
            })
            .collect();
        children.sort();
        let kind = if self.trivial { "triv" } else { "curve" };
        format!("{kind}({})[{}]", self.index, children.join(","))
    }

    fn sort_children(&mut self) {
        for (_, c) in &mut self.children {
            c.sort_children();
        }
        self.children
            .sort_by_key(|(b, c)| (c.canonical(), b.parity, b.multiplicities.clone()));
    }

    fn depth(&self) -> usize {
        1 + self
            .children
            .iter()
            .map(|(_, c)| c.depth())
            .max()
            .unwrap_or(0)
    }

    fn widths(&self, depth: usize, out: &mut Vec<usize>) {
        if out.len() <= depth {
            out.resize(depth + 1, 0);
        }
        out[depth] += 1;
        for (_, c) in &self.children {
            c.widths(depth + 1, out);
        }
    }

    /// Number of even-parity ends: the parent breaking plus the child edges.
    fn gamma0(&self, parent_parity: u8) -> i64 {
        let mut g = i64::from(parent_parity == 0);
        g += self
            .children
            .iter()
            .filter(|(b, _)| b.parity == 0)
            .count() as i64;
        g
    }

    /// Normal Chern number from the index relation at genus zero.
    fn normal_chern(&self, parent_parity: u8) -> i64 {
        (self.index - 2 + self.gamma0(parent_parity)) / 2
    }
}

impl BuildingShape {
    pub fn canonical_string(&self) -> String {
        format!(
            "ind={} top_p{} {}",
            self.total_index,
            self.root_parity,
            self.root.canonical()
        )
    }

    /// Levels and breakings in the coordinates used for concrete buildings.
    pub(crate) fn skeleton(&self) -> Skeleton {
        let mut levels: Vec<Vec<SkelComp>> = Vec::new();
        let mut breakings: Vec<SkelBreak> = Vec::new();
        // Deterministic breadth-first layout.
        let mut frontier: Vec<(&ShapeNode, Option<(usize, usize)>, u8)> =
            vec![(&self.root, None, self.root_parity)];
        let mut depth = 0;
        while !frontier.is_empty() {
            let mut level = Vec::new();
            let mut next = Vec::new();
            for (node, parent, parent_parity) in frontier {
                let idx = level.len();
                level.push(SkelComp {
                    trivial: node.trivial,
                    neg: node.children.len(),
                    index: node.index,
                });
                if let Some(p) = parent {
                    breakings.push(SkelBreak {
                        upper: p,
                        lower: (depth, idx),
                        parity: parent_parity,
                    });
                }
                for (b, c) in &node.children {
                    next.push((c, Some((depth, idx)), b.parity));
                }
            }
            levels.push(level);
            frontier = next;
            depth += 1;
        }
        Skeleton { levels, breakings }
    }

    pub fn classify(&self) -> Classification {
        match match_templates(&self.skeleton()) {
            Ok(t) => Classification::Type(t),
            Err(reason) => Classification::Rejected(reason),
        }
    }

    /// Builds a concrete building realizing the shape, using hyperbolic
    /// breaking orbits.  `use_max_mult` picks the largest admissible
    /// multiplicity on each breaking instead of the smallest.
    pub fn materialize(&self, use_max_mult: bool) -> Result<Building, BuildingError> {
        let top_cz = if self.root_parity == 0 { 2 } else { 1 };
        let top = OrbitInstance::new(OrbitClass::hyperbolic("gamma_top", top_cz), 1);
        let mut counter = 0usize;
        let mut levels: Vec<Vec<Component>> = Vec::new();
        let mut breakings: Vec<Breaking> = Vec::new();
        build_component(
            &self.root,
            top,
            0,
            None,
            use_max_mult,
            &mut counter,
            &mut levels,
            &mut breakings,
        )?;
        let mut it = levels.into_iter();
        let main_level = it.next().unwrap_or_default();
        Ok(Building {
            main_level,
            lower_levels: it.collect(),
            breakings,
        })
    }
}

/// Multiplicities `1..=max` for which some orbit with the given cover parity
/// yields a non-`Forbidden` breaking.
fn admissible_multiplicities(parity: u8, max: u64) -> Vec<u64> {
    let mut out = Vec::new();
    for m in 1..=max {
        let candidates = [
            OrbitClass::hyperbolic("probe_odd", 1),
            OrbitClass::hyperbolic("probe_even", 2),
            OrbitClass::elliptic("probe_ell", std::f64::consts::FRAC_1_PI),
        ];
        let ok = candidates.iter().any(|orbit| {
            let inst = OrbitInstance::new(orbit.clone(), m);
            inst.spectral_data()
                .map(|s| s.parity == parity)
                .unwrap_or(false)
                && matches!(
                    classify_embedded_breaking(&inst),
                    Ok(BreakingClass::Simple | BreakingClass::BadDoubleCover)
                )
        });
        if ok {
            out.push(m);
        }
    }
    out
}

/// Breaking orbit realizing (parity, multiplicity) with hyperbolic data.
fn realize_breaking(name: &str, parity: u8, multiplicity: u64) -> OrbitInstance {
    let cz = match (parity, multiplicity) {
        (1, _) => 1,
        (0, 2) => 1, // bad orbit: double cover of an odd hyperbolic orbit
        (0, _) => 2,
        _ => unreachable!("parity is 0 or 1"),
    };
    OrbitInstance::new(OrbitClass::hyperbolic(name, cz), multiplicity)
}

#[allow(clippy::too_many_arguments)]
fn build_component(
    node: &ShapeNode,
    positive: OrbitInstance,
    level: usize,
    parent: Option<ComponentRef>,
    use_max_mult: bool,
    counter: &mut usize,
    levels: &mut Vec<Vec<Component>>,
    breakings: &mut Vec<Breaking>,
) -> Result<(), BuildingError> {
    if levels.len() <= level {
        levels.resize_with(level + 1, Vec::new);
    }
    let here = ComponentRef {
        level,
        index: levels[level].len(),
    };

    // Child breaking instances; a trivial cylinder reuses its positive orbit.
    let mut child_instances = Vec::new();
    for (b, _) in &node.children {
        let inst = if node.trivial {
            positive.clone()
        } else {
            let m = if use_max_mult {
                *b.multiplicities.last().unwrap_or(&1)
            } else {
                *b.multiplicities.first().unwrap_or(&1)
            };
            *counter += 1;
            realize_breaking(&format!("br{}", *counter - 1), b.parity, m)
        };
        child_instances.push(inst);
    }

    let component = if node.trivial {
        Component::TrivialCylinder(positive.clone())
    } else {
        let mut punctures =
            vec![Puncture::nondegenerate(PunctureSign::Positive, positive.clone())?];
        for inst in &child_instances {
            punctures.push(Puncture::nondegenerate(PunctureSign::Negative, inst.clone())?);
        }
        let chi = 2 - punctures.len() as i64;
        let cz_pos = punctures[0].spectral.cz;
        let cz_neg: i64 = punctures[1..].iter().map(|p| p.spectral.cz).sum();
        let twice_c1 = node.index + chi - cz_pos + cz_neg;
        if twice_c1 % 2 != 0 {
            return Err(BuildingError::Invalid(format!(
                "shape component has no integral relative Chern number (2c1 = {twice_c1})"
            )));
        }
        Component::Curve(PuncturedCurve {
            half_dim_n: 2,
            genus: 0,
            punctures,
            c1_rel: twice_c1 / 2,
            somewhere_injective: true,
            embedded: true,
            delta: Some(0),
            delta_infinity: Some(0),
            immersed: Some(true),
            cover_of: None,
        })
    };
    levels[level].push(component);
    if let Some(upper) = parent {
        breakings.push(Breaking {
            orbit: positive,
            upper,
            lower: here,
            decoration_index: 0,
        });
    }
    for ((_, child), inst) in node.children.iter().zip(child_instances) {
        build_component(
            child,
            inst,
            level + 1,
            Some(here),
            use_max_mult,
            counter,
            levels,
            breakings,
        )?;
    }
    Ok(())
}

struct Generator<'a> {
    bounds: &'a SearchBounds,
    nodes: AtomicUsize,
}

impl Generator<'_> {
    fn tick(&self, n: usize) -> Result<(), BuildingError> {
        let seen = self.nodes.fetch_add(n, Ordering::Relaxed) + n;
        if seen > self.bounds.node_budget {
            return Err(BuildingError::SearchBudgetExceeded { explored: seen });
        }
        Ok(())
    }

    /// All subtrees whose root hangs below an edge of the given parity,
    /// consuming at most `budget` units of index and at most `depth_left`
    /// levels.  Returns `(node, index consumed)` pairs.
    fn subtrees(
        &self,
        budget: i64,
        parent_parity: u8,
        depth_left: usize,
    ) -> Result<Vec<(ShapeNode, i64)>, BuildingError> {
        let mut out = Vec::new();
        // Capping planes: nontrivial, so index >= 1; parity is pinned by
        // #Gamma_0 = [parent even] = index mod 2.
        for index in 1..=budget {
            if (index - i64::from(parent_parity == 0)).rem_euclid(2) != 0 {
                continue;
            }
            out.push((
                ShapeNode {
                    trivial: false,
                    index,
                    children: Vec::new(),
                },
                index,
            ));
        }
        if depth_left >= 2 {
            // Trivial cylinder: both ends carry the parent breaking orbit.
            for (child, used) in self.subtrees(budget, parent_parity, depth_left - 1)? {
                out.push((
                    ShapeNode {
                        trivial: true,
                        index: 0,
                        children: vec![(
                            ShapeBreaking {
                                parity: parent_parity,
                                multiplicities: admissible_multiplicities(
                                    parent_parity,
                                    self.bounds.max_multiplicity,
                                ),
                            },
                            child,
                        )],
                    },
                    used,
                ));
            }
            // Nontrivial branching curves of index >= 1.
            for index in 1..=budget {
                for n_neg in 1..=self.bounds.max_negative_punctures {
                    for combo in self.child_combos(n_neg, budget - index, depth_left - 1)? {
                        let used: i64 = index + combo.iter().map(|(_, _, u)| u).sum::<i64>();
                        let even_children =
                            combo.iter().filter(|(p, _, _)| *p == 0).count() as i64;
                        let gamma0 = i64::from(parent_parity == 0) + even_children;
                        if (index - gamma0).rem_euclid(2) != 0 {
                            continue;
                        }
                        out.push((
                            ShapeNode {
                                trivial: false,
                                index,
                                children: combo
                                    .into_iter()
                                    .map(|(p, c, _)| {
                                        (
                                            ShapeBreaking {
                                                parity: p,
                                                multiplicities: admissible_multiplicities(
                                                    p,
                                                    self.bounds.max_multiplicity,
                                                ),
                                            },
                                            c,
                                        )
                                    })
                                    .collect(),
                            },
                            used,
                        ));
                    }
                }
            }
        }
        self.tick(out.len())?;
        Ok(out)
    }

    /// Ordered tuples of `slots` child subtrees with total index <= budget.
    fn child_combos(
        &self,
        slots: usize,
        budget: i64,
        depth_left: usize,
    ) -> Result<Vec<Vec<(u8, ShapeNode, i64)>>, BuildingError> {
        if slots == 0 {
            return Ok(vec![Vec::new()]);
        }
        let mut out = Vec::new();
        for parity in [0u8, 1u8] {
            for (node, used) in self.subtrees(budget, parity, depth_left)? {
                for mut rest in self.child_combos(slots - 1, budget - used, depth_left)? {
                    rest.push((parity, node.clone(), used));
                    out.push(rest);
                }
            }
        }
        Ok(out)
    }
}

/// Per-node admissibility data for the budget filters.
fn shape_admissible(shape: &BuildingShape, bounds: &SearchBounds) -> bool {
    let root = &shape.root;
    let mut widths = Vec::new();
    root.widths(0, &mut widths);
    if root.depth() > bounds.max_levels
        || widths.iter().any(|&w| w > bounds.max_components_per_level)
        || root.depth() < 2
    {
        return false;
    }
    // Stability: below the main level, a level of nothing but trivial
    // cylinders cannot occur.
    let mut by_level: Vec<Vec<(&ShapeNode, u8)>> = Vec::new();
    collect_levels(root, shape.root_parity, 0, &mut by_level);
    for level in by_level.iter().skip(1) {
        if level.iter().all(|(n, _)| n.trivial) {
            return false;
        }
    }
    // Normal-Chern budget: hat-c_N must sum to 0, realizing one of the two
    // admissible cases.
    let mut hat_sum = 0i64;
    let mut cn_root = 0i64;
    let mut odd_edges = 0usize;
    let mut odd_at_root = false;
    let mut cn_sum = 0i64;
    for (depth, level) in by_level.iter().enumerate() {
        for (node, parent_parity) in level {
            let cn = node.normal_chern(*parent_parity);
            if depth == 0 {
                cn_root = cn;
            }
            let even_children = node.children.iter().filter(|(b, _)| b.parity == 0).count();
            let odd_children = node.children.len() - even_children;
            hat_sum += cn + odd_children as i64;
            odd_edges += odd_children;
            if depth == 0 && odd_children > 0 {
                odd_at_root = true;
            }
            if !node.trivial {
                cn_sum += cn;
            }
        }
    }
    if hat_sum != 0 {
        return false;
    }
    let budget_ok = (odd_edges == 0 && cn_root == 0)
        || (odd_edges == 1
            && odd_at_root
            && root.children.len() == 1
            && !root.trivial
            && cn_root == -1);
    if !budget_ok {
        return false;
    }
    // Intersection lower bound with minimal multiplicities: self-intersection
    // c_N per nontrivial component, m * p per breaking.
    if cn_sum + odd_edges as i64 > 0 {
        return false;
    }
    // Every breaking needs an admissible realization.
    fn edges_ok(node: &ShapeNode) -> bool {
        node.children
            .iter()
            .all(|(b, c)| !b.multiplicities.is_empty() && edges_ok(c))
    }
    edges_ok(root)
}

fn collect_levels<'a>(
    node: &'a ShapeNode,
    parent_parity: u8,
    depth: usize,
    out: &mut Vec<Vec<(&'a ShapeNode, u8)>>,
) {
    if out.len() <= depth {
        out.resize_with(depth + 1, Vec::new);
    }
    out[depth].push((node, parent_parity));
    for (b, c) in &node.children {
        collect_levels(c, b.parity, depth + 1, out);
    }
}

/// Materializes the shape and runs it through the concrete machinery; the
/// enumerator only emits shapes whose realizations validate, close the
/// normal-Chern budget and keep the intersection bound nonpositive.
fn concrete_checks(shape: &BuildingShape) -> Result<bool, BuildingError> {
    for use_max in [false, true] {
        let building = shape.materialize(use_max)?;
        if !building.validate().pass() {
            return Ok(false);
        }
        if building.cn_budget(0).is_err() {
            return Ok(false);
        }
        let mut self_ints = BTreeMap::new();
        for (r, c) in building.components() {
            if !c.is_trivial() {
                self_ints.insert(r, c.normal_chern()?);
            }
        }
        if building.intersection_lower_bound(&self_ints)? > 0 {
            return Ok(false);
        }
        for b in &building.breakings {
            if classify_embedded_breaking(&b.orbit)? == BreakingClass::Forbidden {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Exhaustively enumerates the admissible degeneration shapes of a plane of
/// total index 1 or 2 within the given bounds, deduplicated and sorted by
/// canonical form.  `threads = 0` runs serially.
pub fn enumerate_degenerations(
    total_index: i64,
    bounds: &SearchBounds,
    threads: usize,
) -> Result<Vec<BuildingShape>, BuildingError> {
    assert!(
        (1..=2).contains(&total_index),
        "total index must be 1 or 2"
    );
    assert!(
        bounds.max_levels >= 3 && bounds.max_components_per_level >= 3,
        "bounds too small to cover the admissible shapes"
    );
    // The limit curve is a plane: its single end forces gamma_0 = ind mod 2.
    let root_parity: u8 = if total_index % 2 == 0 { 1 } else { 0 };

    let tasks: Vec<(i64, usize)> = (0..=total_index)
        .flat_map(|idx| (1..=bounds.max_negative_punctures).map(move |n| (idx, n)))
        .collect();

    let run_task = |(root_index, n_neg): (i64, usize)| -> Result<Vec<BuildingShape>, BuildingError> {
        let gen = Generator {
            bounds,
            nodes: AtomicUsize::new(0),
        };
        let mut found = Vec::new();
        for combo in gen.child_combos(n_neg, total_index - root_index, bounds.max_levels - 1)? {
            let used: i64 = root_index + combo.iter().map(|(_, _, u)| u).sum::<i64>();
            if used != total_index {
                continue;
            }
            let even_children = combo.iter().filter(|(p, _, _)| *p == 0).count() as i64;
            let gamma0 = i64::from(root_parity == 0) + even_children;
            if (root_index - gamma0).rem_euclid(2) != 0 {
                continue;
            }
            let mut root = ShapeNode {
                trivial: false,
                index: root_index,
                children: combo
                    .into_iter()
                    .map(|(p, c, _)| {
                        (
                            ShapeBreaking {
                                parity: p,
                                multiplicities: admissible_multiplicities(
                                    p,
                                    bounds.max_multiplicity,
                                ),
                            },
                            c,
                        )
                    })
                    .collect(),
            };
            root.sort_children();
            let shape = BuildingShape {
                total_index,
                root_parity,
                root,
            };
            if shape_admissible(&shape, bounds) && concrete_checks(&shape)? {
                found.push(shape);
            }
        }
        Ok(found)
    };

    let mut shapes: Vec<BuildingShape> = Vec::new();
    if threads <= 1 {
        for task in tasks {
            shapes.extend(run_task(task)?);
        }
    } else {
        let chunks: Vec<Vec<(i64, usize)>> = tasks
            .chunks(tasks.len().div_ceil(threads))
            .map(|c| c.to_vec())
            .collect();
        let results: Vec<Result<Vec<BuildingShape>, BuildingError>> =
            std::thread::scope(|scope| {
                let handles: Vec<_> = chunks
                    .into_iter()
                    .map(|chunk| {
                        scope.spawn(move || {
                            let mut out = Vec::new();
                            for task in chunk {
                                out.extend(run_task(task)?);
                            }
                            Ok(out)
                        })
                    })
                    .collect();
                handles.into_iter().map(|h| h.join().unwrap()).collect()
            });
        for r in results {
            shapes.extend(r?);
        }
    }

    shapes.sort_by_key(|s| s.canonical_string());
    shapes.dedup_by_key(|s| s.canonical_string());
    Ok(shapes)
}

/// The six degeneration templates, as shapes.
pub fn thm_templates(bounds: &SearchBounds) -> Vec<(BuildingType, BuildingShape)> {
    let even = || ShapeBreaking {
        parity: 0,
        multiplicities: admissible_multiplicities(0, bounds.max_multiplicity),
    };
    let odd = || ShapeBreaking {
        parity: 1,
        multiplicities: admissible_multiplicities(1, bounds.max_multiplicity),
    };
    let plane = |index: i64| ShapeNode {
        trivial: false,
        index,
        children: Vec::new(),
    };
    let curve = |index: i64, children: Vec<(ShapeBreaking, ShapeNode)>| ShapeNode {
        trivial: false,
        index,
        children,
    };
    let mut shapes = vec![
        (
            BuildingType::I,
            BuildingShape {
                total_index: 1,
                root_parity: 0,
                root: curve(0, vec![(even(), plane(1))]),
            },
        ),
        (
            BuildingType::II,
            BuildingShape {
                total_index: 2,
                root_parity: 1,
                root: curve(0, vec![(odd(), plane(2))]),
            },
        ),
        (
            BuildingType::III,
            BuildingShape {
                total_index: 2,
                root_parity: 1,
                root: curve(1, vec![(even(), plane(1))]),
            },
        ),
        (
            BuildingType::IV,
            BuildingShape {
                total_index: 2,
                root_parity: 1,
                root: curve(0, vec![(even(), plane(1)), (even(), plane(1))]),
            },
        ),
        (
            BuildingType::V,
            BuildingShape {
                total_index: 2,
                root_parity: 1,
                root: curve(
                    0,
                    vec![
                        (even(), plane(1)),
                        (
                            even(),
                            ShapeNode {
                                trivial: true,
                                index: 0,
                                children: vec![(even(), plane(1))],
                            },
                        ),
                    ],
                ),
            },
        ),
        (
            BuildingType::VI,
            BuildingShape {
                total_index: 2,
                root_parity: 1,
                root: curve(0, vec![(odd(), curve(1, vec![(even(), plane(1))]))]),
            },
        ),
    ];
    for (_, s) in &mut shapes {
        s.root.sort_children();
    }
    shapes
}
