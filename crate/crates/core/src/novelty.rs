//! The novelty catalogue: eight scenario patches that change simulator
//! dynamics, extend the entity lexicon and the primitive action list, and
//! leave the symbolic domain's operator set untouched — the planner keeps
//! producing its usual solution, which now executes to a failure the agent
//! must learn around.
//!
//! Each spec also ships a scripted completion policy used only by tests to
//! prove the post-novelty task is still solvable by some primitive sequence.

use alloc::string::String;
use alloc::vec::Vec;

use crate::world::{
    base_actions, Action, EntityKind, ExtractRule, ItemStart, World, WorldConfig,
};

/// Identifier of a catalogued novelty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NoveltyId {
    /// Axe in inventory; breaking requires it selected.
    AtbEasy,
    /// Axe somewhere in the world; breaking requires it selected.
    AtbHard,
    /// Crafting table on fire; water in inventory; spray to extinguish.
    FctEasy,
    /// Crafting table on fire; water somewhere in the world.
    FctHard,
    /// Rubber only extractable facing a rubber tree.
    RtEasy,
    /// Rubber only extractable from a tap placed next to a rubber tree.
    RtHard,
    /// Breaking does nothing; scraping a tree yields planks.
    Sp,
    /// Both easy axe and easy fire patches at once.
    AtbFctEasy,
}

impl NoveltyId {
    /// Stable string id used on the command line and in result files.
    pub fn as_str(self) -> &'static str {
        match self {
            NoveltyId::AtbEasy => "ATB-easy",
            NoveltyId::AtbHard => "ATB-hard",
            NoveltyId::FctEasy => "FCT-easy",
            NoveltyId::FctHard => "FCT-hard",
            NoveltyId::RtEasy => "RT-easy",
            NoveltyId::RtHard => "RT-hard",
            NoveltyId::Sp => "SP",
            NoveltyId::AtbFctEasy => "ATB+FCT-easy",
        }
    }

    /// Parses a string id (case-sensitive, as printed by the catalogue).
    pub fn parse(s: &str) -> Result<NoveltyId, UnknownNovelty> {
        catalogue()
            .iter()
            .map(|n| n.id)
            .find(|id| id.as_str() == s)
            .ok_or_else(|| UnknownNovelty { id: String::from(s) })
    }
}

/// Error for an id not in the catalogue.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownNovelty {
    /// The unrecognized id.
    pub id: String,
}

impl core::fmt::Display for UnknownNovelty {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "unknown novelty `{}`", self.id)
    }
}

/// One catalogued novelty: what it adds and how the simulator changes.
#[derive(Debug, Clone)]
pub struct NoveltySpec {
    /// Catalogue id.
    pub id: NoveltyId,
    /// One-line description for the catalogue listing.
    pub description: &'static str,
    /// New entity kinds (E′), disjoint from the base lexicon.
    pub new_entities: Vec<EntityKind>,
    /// Primitive actions appended to the base action list.
    pub new_actions: Vec<Action>,
}

impl NoveltySpec {
    /// Simulator configuration with this novelty's dynamics patch applied.
    pub fn world_config(&self) -> WorldConfig {
        let mut cfg = WorldConfig::default();
        match self.id {
            NoveltyId::AtbEasy => {
                cfg.axe = ItemStart::InInventory;
                cfg.break_requires_axe = true;
            }
            NoveltyId::AtbHard => {
                cfg.axe = ItemStart::InWorld;
                cfg.break_requires_axe = true;
            }
            NoveltyId::FctEasy => {
                cfg.water = ItemStart::InInventory;
                cfg.table_on_fire = true;
            }
            NoveltyId::FctHard => {
                cfg.water = ItemStart::InWorld;
                cfg.table_on_fire = true;
            }
            NoveltyId::RtEasy => {
                cfg.rubber_trees = 1;
                cfg.extract = ExtractRule::FromRubberTree;
            }
            NoveltyId::RtHard => {
                cfg.rubber_trees = 1;
                cfg.extract = ExtractRule::FromPlacedTap;
            }
            NoveltyId::Sp => {
                cfg.break_disabled = true;
                cfg.scrape_enabled = true;
            }
            NoveltyId::AtbFctEasy => {
                cfg.axe = ItemStart::InInventory;
                cfg.break_requires_axe = true;
                cfg.water = ItemStart::InInventory;
                cfg.table_on_fire = true;
            }
        }
        cfg
    }

    /// The full action list: base actions plus this novelty's additions.
    pub fn action_list(&self) -> Vec<Action> {
        let mut actions = base_actions();
        actions.extend(self.new_actions.iter().copied());
        actions
    }
}

/// The catalogue, in fixed presentation order.
pub fn catalogue() -> Vec<NoveltySpec> {
    alloc::vec![
        NoveltySpec {
            id: NoveltyId::AtbEasy,
            description: "axe in inventory; break works only with the axe selected",
            new_entities: alloc::vec![EntityKind::Axe],
            new_actions: alloc::vec![Action::Select(EntityKind::Axe)],
        },
        NoveltySpec {
            id: NoveltyId::AtbHard,
            description: "axe lying in the world; break works only with the axe selected",
            new_entities: alloc::vec![EntityKind::Axe],
            new_actions: alloc::vec![
                Action::Select(EntityKind::Axe),
                Action::Approach(EntityKind::Axe)
            ],
        },
        NoveltySpec {
            id: NoveltyId::FctEasy,
            description: "crafting table on fire; water in inventory; spray to extinguish",
            new_entities: alloc::vec![EntityKind::Water, EntityKind::Fire],
            new_actions: alloc::vec![Action::Select(EntityKind::Water), Action::Spray],
        },
        NoveltySpec {
            id: NoveltyId::FctHard,
            description: "crafting table on fire; water lying in the world",
            new_entities: alloc::vec![EntityKind::Water, EntityKind::Fire],
            new_actions: alloc::vec![
                Action::Select(EntityKind::Water),
                Action::Spray,
                Action::Approach(EntityKind::Water)
            ],
        },
        NoveltySpec {
            id: NoveltyId::RtEasy,
            description: "rubber comes only from a rubber tree",
            new_entities: alloc::vec![EntityKind::RubberTree],
            new_actions: alloc::vec![Action::Approach(EntityKind::RubberTree)],
        },
        NoveltySpec {
            id: NoveltyId::RtHard,
            description: "rubber comes only from a tap placed next to a rubber tree",
            new_entities: alloc::vec![EntityKind::RubberTree],
            new_actions: alloc::vec![
                Action::Approach(EntityKind::RubberTree),
                Action::PlaceTreeTap
            ],
        },
        NoveltySpec {
            id: NoveltyId::Sp,
            description: "break does nothing; scraping a tree yields planks",
            new_entities: alloc::vec![],
            new_actions: alloc::vec![Action::ScrapePlank],
        },
        NoveltySpec {
            id: NoveltyId::AtbFctEasy,
            description: "axe required for breaking and the crafting table is on fire",
            new_entities: alloc::vec![EntityKind::Axe, EntityKind::Water, EntityKind::Fire],
            new_actions: alloc::vec![
                Action::Select(EntityKind::Axe),
                Action::Select(EntityKind::Water),
                Action::Spray
            ],
        },
    ]
}

/// Looks up a spec by id.
pub fn spec(id: NoveltyId) -> NoveltySpec {
    catalogue().into_iter().find(|n| n.id == id).expect("catalogue covers every id")
}

/// Builds a freshly placed world plus action list for a novelty.
pub fn apply_novelty(
    spec: &NoveltySpec,
    seed: u64,
) -> Result<(World, Vec<Action>), crate::world::WorldError> {
    let world = World::new(&spec.world_config(), seed)?;
    Ok((world, spec.action_list()))
}

/// Drives a world from reset to a crafted pogo stick using privileged
/// knowledge of the novelty. Returns true on success. Used by tests to prove
/// post-novelty solvability; the learning agent never sees these scripts.
pub fn oracle_policy(id: NoveltyId, world: &mut World) -> bool {
    let r = match id {
        NoveltyId::AtbEasy => oracle_atb(world, false),
        NoveltyId::AtbHard => oracle_atb(world, true),
        NoveltyId::FctEasy => oracle_fct(world, false, false),
        NoveltyId::FctHard => oracle_fct(world, true, false),
        NoveltyId::RtEasy => oracle_rt(world, false),
        NoveltyId::RtHard => oracle_rt(world, true),
        NoveltyId::Sp => oracle_sp(world),
        NoveltyId::AtbFctEasy => oracle_fct(world, false, true),
    };
    r.is_some() && world.count(EntityKind::PogoStick) >= 1
}

/// Convenience: step and demand the action did something.
fn act(world: &mut World, a: Action) -> Option<()> {
    let events = world.step(a).ok()?;
    if events.contains(&crate::world::Event::ActionFailed)
        || events.contains(&crate::world::Event::Blocked)
    {
        return None;
    }
    Some(())
}

fn go(world: &mut World, kind: EntityKind) -> Option<()> {
    match world.approach(kind) {
        Ok(run) if run.completed => Some(()),
        _ => None,
    }
}

/// Fetch: walk next to a world item and step onto it to pick it up.
fn fetch(world: &mut World, kind: EntityKind) -> Option<()> {
    go(world, kind)?;
    act(world, Action::MoveForward)
}

/// Break `n` trees (selecting the axe first when required).
fn gather_logs(world: &mut World, n: usize, axe: bool) -> Option<()> {
    for _ in 0..n {
        go(world, EntityKind::TreeLog)?;
        if axe && world.selected() != Some(EntityKind::Axe) {
            act(world, Action::Select(EntityKind::Axe))?;
        }
        act(world, Action::Break)?;
    }
    Some(())
}

/// Extinguish the table if this scenario set it on fire.
fn quench(world: &mut World) -> Option<()> {
    go(world, EntityKind::CraftingTable)?;
    act(world, Action::Select(EntityKind::Water))?;
    act(world, Action::Spray)
}

fn oracle_atb(world: &mut World, fetch_axe: bool) -> Option<()> {
    if fetch_axe {
        fetch(world, EntityKind::Axe)?;
    }
    gather_logs(world, 2, true)?;
    act(world, Action::CraftPlanks)?;
    act(world, Action::CraftPlanks)?;
    act(world, Action::CraftStick)?;
    go(world, EntityKind::CraftingTable)?;
    act(world, Action::CraftTreeTap)?;
    act(world, Action::Select(EntityKind::TreeTap))?;
    go(world, EntityKind::TreeLog)?;
    act(world, Action::ExtractRubber)?;
    act(world, Action::Select(EntityKind::Axe))?;
    act(world, Action::Break)?;
    act(world, Action::CraftPlanks)?;
    act(world, Action::CraftStick)?;
    go(world, EntityKind::CraftingTable)?;
    act(world, Action::CraftPogoStick)
}

fn oracle_fct(world: &mut World, fetch_water: bool, axe: bool) -> Option<()> {
    if fetch_water {
        fetch(world, EntityKind::Water)?;
    }
    gather_logs(world, 2, axe)?;
    act(world, Action::CraftPlanks)?;
    act(world, Action::CraftPlanks)?;
    act(world, Action::CraftStick)?;
    quench(world)?;
    act(world, Action::CraftTreeTap)?;
    act(world, Action::Select(EntityKind::TreeTap))?;
    go(world, EntityKind::TreeLog)?;
    act(world, Action::ExtractRubber)?;
    if axe {
        act(world, Action::Select(EntityKind::Axe))?;
    }
    act(world, Action::Break)?;
    act(world, Action::CraftPlanks)?;
    act(world, Action::CraftStick)?;
    go(world, EntityKind::CraftingTable)?;
    act(world, Action::CraftPogoStick)
}

fn oracle_rt(world: &mut World, placed_tap: bool) -> Option<()> {
    gather_logs(world, 2, false)?;
    act(world, Action::CraftPlanks)?;
    act(world, Action::CraftPlanks)?;
    act(world, Action::CraftStick)?;
    go(world, EntityKind::CraftingTable)?;
    act(world, Action::CraftTreeTap)?;
    if placed_tap {
        // Stand somewhere facing an air cell that touches the rubber tree,
        // place the tap there, and milk it.
        let route = world.tap_site_route().ok()?;
        if !world.run_route(route).completed {
            return None;
        }
        act(world, Action::PlaceTreeTap)?;
        act(world, Action::ExtractRubber)?;
    } else {
        act(world, Action::Select(EntityKind::TreeTap))?;
        go(world, EntityKind::RubberTree)?;
        act(world, Action::ExtractRubber)?;
    }
    gather_logs(world, 1, false)?;
    act(world, Action::CraftPlanks)?;
    act(world, Action::CraftStick)?;
    go(world, EntityKind::CraftingTable)?;
    act(world, Action::CraftPogoStick)
}

fn oracle_sp(world: &mut World) -> Option<()> {
    go(world, EntityKind::TreeLog)?;
    for _ in 0..3 {
        act(world, Action::ScrapePlank)?;
    }
    act(world, Action::CraftStick)?;
    act(world, Action::CraftStick)?;
    go(world, EntityKind::CraftingTable)?;
    act(world, Action::CraftTreeTap)?;
    act(world, Action::Select(EntityKind::TreeTap))?;
    go(world, EntityKind::TreeLog)?;
    act(world, Action::ExtractRubber)?;
    go(world, EntityKind::CraftingTable)?;
    act(world, Action::CraftPogoStick)
}
