//! Crafting-gridworld simulator: a walled 12×12 arena with trees, a crafting
//! table, an agent with an inventory, primitive actions, a beam-based
//! observation vector, and breadth-first-search-driven `approach` macros.
//!
//! Novelty scenarios reconfigure the simulator through [`WorldConfig`] rule
//! flags (what `break` needs, how rubber is extracted, whether the table is
//! on fire, …); the step function itself stays one deterministic transition
//! rule. Identical config + seed + action sequence ⇒ identical traces.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::util::fmath;

/// Everything that can appear in an observation channel: the eight base
/// entity kinds, in fixed order, followed by the novelty-introduced kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EntityKind {
    /// Arena border and obstacles.
    Wall,
    /// Regular tree (yields a log when broken).
    TreeLog,
    /// Crafting table.
    CraftingTable,
    /// Plank (inventory item).
    Plank,
    /// Stick (inventory item).
    Stick,
    /// Tree tap (inventory item; placeable under the hard rubber-tree rule).
    TreeTap,
    /// Rubber (inventory item).
    Rubber,
    /// Pogo stick (inventory item, the goal).
    PogoStick,
    /// Axe (novelty item).
    Axe,
    /// Water (novelty item).
    Water,
    /// Fire status channel (novelty; never an inventory item).
    Fire,
    /// Rubber tree (novelty entity; the only rubber source when present).
    RubberTree,
}

impl EntityKind {
    /// Lowercase symbolic name, matching the PDDL object names.
    pub fn name(self) -> &'static str {
        match self {
            EntityKind::Wall => "wall",
            EntityKind::TreeLog => "tree_log",
            EntityKind::CraftingTable => "crafting_table",
            EntityKind::Plank => "plank",
            EntityKind::Stick => "stick",
            EntityKind::TreeTap => "tree_tap",
            EntityKind::Rubber => "rubber",
            EntityKind::PogoStick => "pogo_stick",
            EntityKind::Axe => "axe",
            EntityKind::Water => "water",
            EntityKind::Fire => "fire",
            EntityKind::RubberTree => "rubber_tree",
        }
    }

    /// Entity kind for a symbolic object name.
    pub fn from_name(name: &str) -> Option<EntityKind> {
        ALL_KINDS.iter().copied().find(|k| k.name() == name)
    }
}

/// Every kind, used for name lookups.
const ALL_KINDS: [EntityKind; 12] = [
    EntityKind::Wall,
    EntityKind::TreeLog,
    EntityKind::CraftingTable,
    EntityKind::Plank,
    EntityKind::Stick,
    EntityKind::TreeTap,
    EntityKind::Rubber,
    EntityKind::PogoStick,
    EntityKind::Axe,
    EntityKind::Water,
    EntityKind::Fire,
    EntityKind::RubberTree,
];

/// The eight always-present entity kinds, in observation order.
pub const BASE_LEXICON: [EntityKind; 8] = [
    EntityKind::Wall,
    EntityKind::TreeLog,
    EntityKind::CraftingTable,
    EntityKind::Plank,
    EntityKind::Stick,
    EntityKind::TreeTap,
    EntityKind::Rubber,
    EntityKind::PogoStick,
];

/// One grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cell {
    /// Free space (the agent stands on air).
    Air,
    /// Impassable border/obstacle.
    Wall,
    /// A regular tree.
    Tree,
    /// The crafting table.
    CraftingTable,
    /// A rubber tree (novelty).
    RubberTree,
    /// An item lying in the world; walking onto it picks it up.
    Item(EntityKind),
    /// A tree tap placed next to a rubber tree (novelty, hard variant).
    PlacedTap,
}

/// Agent heading.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Heading {
    /// −y.
    North,
    /// +x.
    East,
    /// +y.
    South,
    /// −x.
    West,
}

impl Heading {
    fn left(self) -> Heading {
        match self {
            Heading::North => Heading::West,
            Heading::West => Heading::South,
            Heading::South => Heading::East,
            Heading::East => Heading::North,
        }
    }

    fn right(self) -> Heading {
        match self {
            Heading::North => Heading::East,
            Heading::East => Heading::South,
            Heading::South => Heading::West,
            Heading::West => Heading::North,
        }
    }

    fn delta(self) -> (i32, i32) {
        match self {
            Heading::North => (0, -1),
            Heading::East => (1, 0),
            Heading::South => (0, 1),
            Heading::West => (-1, 0),
        }
    }

    fn index(self) -> usize {
        match self {
            Heading::North => 0,
            Heading::East => 1,
            Heading::South => 2,
            Heading::West => 3,
        }
    }
}

/// Primitive and macro actions. Indices into a scenario's action list are
/// stable for the lifetime of a learner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Action {
    /// Rotate left.
    TurnLeft,
    /// Rotate right.
    TurnRight,
    /// Move one cell forward; walking onto an item picks it up.
    MoveForward,
    /// Break the faced entity.
    Break,
    /// Extract rubber from the faced source.
    ExtractRubber,
    /// 1 log → 4 planks.
    CraftPlanks,
    /// 2 planks → 4 sticks.
    CraftStick,
    /// 5 planks + 1 stick → 1 tap (at the table).
    CraftTreeTap,
    /// 2 planks + 4 sticks + 1 rubber → 1 pogo stick (at the table).
    CraftPogoStick,
    /// Select an inventory item.
    Select(EntityKind),
    /// Navigate adjacent to the nearest instance of a kind and face it.
    Approach(EntityKind),
    /// Extinguish a faced burning cell (consumes selected water).
    Spray,
    /// Place a held tap on a faced air cell next to a rubber tree.
    PlaceTreeTap,
    /// Scrape a faced tree for planks (novelty).
    ScrapePlank,
}

impl Action {
    /// Stable lowercase name for logs and serialized policies.
    pub fn name(self) -> String {
        match self {
            Action::TurnLeft => String::from("turn_left"),
            Action::TurnRight => String::from("turn_right"),
            Action::MoveForward => String::from("move_forward"),
            Action::Break => String::from("break"),
            Action::ExtractRubber => String::from("extract_rubber"),
            Action::CraftPlanks => String::from("craft_planks"),
            Action::CraftStick => String::from("craft_stick"),
            Action::CraftTreeTap => String::from("craft_tree_tap"),
            Action::CraftPogoStick => String::from("craft_pogostick"),
            Action::Select(k) => {
                let mut s = String::from("select_");
                s.push_str(k.name());
                s
            }
            Action::Approach(k) => {
                let mut s = String::from("approach_");
                s.push_str(k.name());
                s
            }
            Action::Spray => String::from("spray"),
            Action::PlaceTreeTap => String::from("place_tree_tap"),
            Action::ScrapePlank => String::from("scrape_plank"),
        }
    }
}

/// The 17 actions every scenario starts from; novelties append to this list.
pub fn base_actions() -> Vec<Action> {
    let mut v = alloc::vec![
        Action::TurnLeft,
        Action::TurnRight,
        Action::MoveForward,
        Action::Break,
        Action::ExtractRubber,
        Action::CraftPlanks,
        Action::CraftStick,
        Action::CraftTreeTap,
        Action::CraftPogoStick,
    ];
    for k in [
        EntityKind::TreeLog,
        EntityKind::Plank,
        EntityKind::Stick,
        EntityKind::TreeTap,
        EntityKind::Rubber,
        EntityKind::PogoStick,
    ] {
        v.push(Action::Select(k));
    }
    v.push(Action::Approach(EntityKind::TreeLog));
    v.push(Action::Approach(EntityKind::CraftingTable));
    v
}

/// Where a novelty item starts an episode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ItemStart {
    /// Not part of the scenario.
    #[default]
    Absent,
    /// One unit already in the inventory (easy variants).
    InInventory,
    /// One instance lying in the world (hard variants).
    InWorld,
}

/// How rubber extraction works.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExtractRule {
    /// Face a regular tree while holding a tap (the pre-novelty rule).
    #[default]
    FromTree,
    /// Face a rubber tree while holding a tap.
    FromRubberTree,
    /// Face a tap that has been placed next to a rubber tree.
    FromPlacedTap,
}

/// Scenario configuration: arena shape, entity counts, and dynamics rules.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldConfig {
    /// Arena width in cells, border included.
    pub width: usize,
    /// Arena height in cells, border included.
    pub height: usize,
    /// Regular tree count.
    pub trees: usize,
    /// Crafting table count.
    pub crafting_tables: usize,
    /// Rubber tree count (novelty).
    pub rubber_trees: usize,
    /// Episode horizon in primitive timesteps.
    pub horizon: u32,
    /// Axe placement (novelty).
    pub axe: ItemStart,
    /// Water placement (novelty).
    pub water: ItemStart,
    /// Whether crafting tables start on fire (novelty).
    pub table_on_fire: bool,
    /// `break` only works with an axe selected (novelty).
    pub break_requires_axe: bool,
    /// `break` never works (novelty; paired with scraping).
    pub break_disabled: bool,
    /// Whether `scrape_plank` does anything (novelty).
    pub scrape_enabled: bool,
    /// Rubber extraction rule.
    pub extract: ExtractRule,
}

impl Default for WorldConfig {
    fn default() -> Self {
        WorldConfig {
            width: 12,
            height: 12,
            trees: 6,
            crafting_tables: 1,
            rubber_trees: 0,
            horizon: 300,
            axe: ItemStart::Absent,
            water: ItemStart::Absent,
            table_on_fire: false,
            break_requires_axe: false,
            break_disabled: false,
            scrape_enabled: false,
            extract: ExtractRule::FromTree,
        }
    }
}

impl WorldConfig {
    /// Observation lexicon: the base kinds plus whatever this scenario adds,
    /// in a fixed append order (axe, water, fire, rubber tree).
    pub fn lexicon(&self) -> Vec<EntityKind> {
        let mut e: Vec<EntityKind> = BASE_LEXICON.to_vec();
        if self.axe != ItemStart::Absent {
            e.push(EntityKind::Axe);
        }
        if self.water != ItemStart::Absent {
            e.push(EntityKind::Water);
        }
        if self.table_on_fire {
            e.push(EntityKind::Fire);
        }
        if self.rubber_trees > 0 {
            e.push(EntityKind::RubberTree);
        }
        e
    }

    /// Observation vector length: 8 beams + 1 inventory slot per lexicon
    /// entity, plus a selected-item one-hot with a trailing "none" slot.
    pub fn observation_len(&self) -> usize {
        let e = self.lexicon().len();
        8 * e + e + e + 1
    }
}

/// What a primitive step did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Event {
    /// Agent moved one cell.
    Moved,
    /// Agent rotated.
    Turned,
    /// Move was blocked by a wall or entity.
    Blocked,
    /// The action's requirements were not met; world unchanged.
    ActionFailed,
    /// Agent walked onto an item and picked it up.
    PickedUp(EntityKind),
    /// A craft action produced this kind.
    Crafted(EntityKind),
    /// A tree was broken into a log.
    Broke,
    /// Rubber was extracted.
    Extracted,
    /// An item was selected.
    Selected(EntityKind),
    /// A fire was extinguished.
    Extinguished,
    /// A tap was placed.
    TapPlaced,
    /// A tree was scraped for planks.
    Scraped,
}

/// World-level errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WorldError {
    /// More entities requested than free interior cells.
    PlacementOverflow,
    /// step() was called at or past the horizon.
    EpisodeOver,
}

impl core::fmt::Display for WorldError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            WorldError::PlacementOverflow => write!(f, "too many entities for the arena"),
            WorldError::EpisodeOver => write!(f, "episode horizon reached"),
        }
    }
}

/// Why an approach macro could not run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApproachError {
    /// No instance of the target kind is on the grid.
    NoTarget,
    /// No free path reaches a cell adjacent to any instance.
    NoPath,
}

impl core::fmt::Display for ApproachError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ApproachError::NoTarget => write!(f, "no such entity on the grid"),
            ApproachError::NoPath => write!(f, "target unreachable"),
        }
    }
}

/// The simulator state for one episode.
#[derive(Debug, Clone)]
pub struct World {
    config: WorldConfig,
    lexicon: Vec<EntityKind>,
    grid: Vec<Cell>,
    agent: (i32, i32),
    heading: Heading,
    inventory: BTreeMap<EntityKind, i64>,
    selected: Option<EntityKind>,
    burning: Vec<(i32, i32)>,
    step_count: u32,
}

/// Eight compass direction vectors, clockwise from north; x grows east and
/// y grows south.
const COMPASS: [(i32, i32); 8] =
    [(0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1)];

impl World {
    /// Builds and populates a world: border walls, then trees, tables,
    /// rubber trees, and world items placed uniformly at random in distinct
    /// free interior cells, then the agent with a random heading.
    pub fn new(config: &WorldConfig, seed: u64) -> Result<World, WorldError> {
        let mut w = World {
            config: config.clone(),
            lexicon: config.lexicon(),
            grid: alloc::vec![Cell::Air; config.width * config.height],
            agent: (1, 1),
            heading: Heading::North,
            inventory: BTreeMap::new(),
            selected: None,
            burning: Vec::new(),
            step_count: 0,
        };
        for x in 0..config.width as i32 {
            w.set_cell(x, 0, Cell::Wall);
            w.set_cell(x, config.height as i32 - 1, Cell::Wall);
        }
        for y in 0..config.height as i32 {
            w.set_cell(0, y, Cell::Wall);
            w.set_cell(config.width as i32 - 1, y, Cell::Wall);
        }

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut free: Vec<(i32, i32)> = Vec::new();
        for y in 1..config.height as i32 - 1 {
            for x in 1..config.width as i32 - 1 {
                free.push((x, y));
            }
        }
        let mut wanted: Vec<Cell> = Vec::new();
        for _ in 0..config.trees {
            wanted.push(Cell::Tree);
        }
        for _ in 0..config.crafting_tables {
            wanted.push(Cell::CraftingTable);
        }
        for _ in 0..config.rubber_trees {
            wanted.push(Cell::RubberTree);
        }
        if config.axe == ItemStart::InWorld {
            wanted.push(Cell::Item(EntityKind::Axe));
        }
        if config.water == ItemStart::InWorld {
            wanted.push(Cell::Item(EntityKind::Water));
        }
        if wanted.len() + 1 > free.len() {
            return Err(WorldError::PlacementOverflow);
        }
        for cell in wanted {
            let i = rng.gen_range(0..free.len());
            let (x, y) = free.swap_remove(i);
            w.set_cell(x, y, cell);
            if cell == Cell::CraftingTable && config.table_on_fire {
                w.burning.push((x, y));
            }
        }
        let i = rng.gen_range(0..free.len());
        w.agent = free.swap_remove(i);
        w.heading = match rng.gen_range(0..4u8) {
            0 => Heading::North,
            1 => Heading::East,
            2 => Heading::South,
            _ => Heading::West,
        };

        if config.axe == ItemStart::InInventory {
            w.inventory.insert(EntityKind::Axe, 1);
        }
        if config.water == ItemStart::InInventory {
            w.inventory.insert(EntityKind::Water, 1);
        }
        Ok(w)
    }

    /// Builds a world with a fixed layout instead of random placement:
    /// border walls plus the given cells, agent pose as stated. Used by
    /// tests and scripted oracles that need exact geometry.
    pub fn with_layout(
        config: &WorldConfig,
        cells: &[(i32, i32, Cell)],
        agent: (i32, i32),
        heading: Heading,
    ) -> World {
        let mut w = World {
            config: config.clone(),
            lexicon: config.lexicon(),
            grid: alloc::vec![Cell::Air; config.width * config.height],
            agent,
            heading,
            inventory: BTreeMap::new(),
            selected: None,
            burning: Vec::new(),
            step_count: 0,
        };
        for x in 0..config.width as i32 {
            w.set_cell(x, 0, Cell::Wall);
            w.set_cell(x, config.height as i32 - 1, Cell::Wall);
        }
        for y in 0..config.height as i32 {
            w.set_cell(0, y, Cell::Wall);
            w.set_cell(config.width as i32 - 1, y, Cell::Wall);
        }
        for (x, y, c) in cells {
            w.set_cell(*x, *y, *c);
            if *c == Cell::CraftingTable && config.table_on_fire {
                w.burning.push((*x, *y));
            }
        }
        if config.axe == ItemStart::InInventory {
            w.inventory.insert(EntityKind::Axe, 1);
        }
        if config.water == ItemStart::InInventory {
            w.inventory.insert(EntityKind::Water, 1);
        }
        w
    }

    /// Sets the inventory count for a kind (test and oracle setup).
    pub fn set_count(&mut self, kind: EntityKind, n: i64) {
        self.inventory.insert(kind, n);
    }

    fn cell(&self, x: i32, y: i32) -> Cell {
        if x < 0 || y < 0 || x >= self.config.width as i32 || y >= self.config.height as i32 {
            return Cell::Wall;
        }
        self.grid[y as usize * self.config.width + x as usize]
    }

    fn set_cell(&mut self, x: i32, y: i32, c: Cell) {
        self.grid[y as usize * self.config.width + x as usize] = c;
    }

    fn front(&self) -> (i32, i32) {
        let (dx, dy) = self.heading.delta();
        (self.agent.0 + dx, self.agent.1 + dy)
    }

    fn is_burning(&self, x: i32, y: i32) -> bool {
        self.burning.contains(&(x, y))
    }

    /// Inventory count for a kind.
    pub fn count(&self, kind: EntityKind) -> i64 {
        self.inventory.get(&kind).copied().unwrap_or(0)
    }

    fn add(&mut self, kind: EntityKind, n: i64) {
        *self.inventory.entry(kind).or_insert(0) += n;
    }

    /// Currently selected item, if any.
    pub fn selected(&self) -> Option<EntityKind> {
        self.selected
    }

    /// Scenario configuration.
    pub fn config(&self) -> &WorldConfig {
        &self.config
    }

    /// Observation lexicon for this scenario.
    pub fn lexicon(&self) -> &[EntityKind] {
        &self.lexicon
    }

    /// Timesteps consumed this episode.
    pub fn step_count(&self) -> u32 {
        self.step_count
    }

    /// True once the horizon is exhausted.
    pub fn episode_over(&self) -> bool {
        self.step_count >= self.config.horizon
    }

    /// Agent position (x, y).
    pub fn agent_pos(&self) -> (i32, i32) {
        self.agent
    }

    /// Agent heading.
    pub fn heading(&self) -> Heading {
        self.heading
    }

    /// Number of world instances of a kind (for symbolic `world` counts).
    pub fn world_count(&self, kind: EntityKind) -> i64 {
        let mut n = 0;
        for y in 0..self.config.height as i32 {
            for x in 0..self.config.width as i32 {
                if self.cell_has_kind(x, y, kind) {
                    n += 1;
                }
            }
        }
        n
    }

    /// Number of free (air) cells, for the symbolic `world air` count.
    pub fn air_count(&self) -> i64 {
        self.grid.iter().filter(|c| **c == Cell::Air).count() as i64
    }

    /// Number of items of a kind lying loose on the floor, for symbolic
    /// `floating` facts.
    pub fn loose_count(&self, kind: EntityKind) -> i64 {
        self.grid.iter().filter(|c| **c == Cell::Item(kind)).count() as i64
    }

    /// Number of cells currently on fire, for the symbolic `world fire`
    /// count.
    pub fn burning_count(&self) -> i64 {
        self.burning.len() as i64
    }

    /// Whether a cell registers on a kind's observation channel.
    fn cell_has_kind(&self, x: i32, y: i32, kind: EntityKind) -> bool {
        match (self.cell(x, y), kind) {
            (Cell::Wall, EntityKind::Wall) => true,
            (Cell::Tree, EntityKind::TreeLog) => true,
            (Cell::CraftingTable, EntityKind::CraftingTable) => true,
            (Cell::RubberTree, EntityKind::RubberTree) => true,
            (Cell::PlacedTap, EntityKind::TreeTap) => true,
            (Cell::Item(k), _) if k == kind => true,
            (_, EntityKind::Fire) => self.is_burning(x, y),
            _ => false,
        }
    }

    /// Floating item directly in front, if any. Items read as air to the
    /// symbolic detector but can be stepped onto for pickup.
    pub fn facing_item(&self) -> Option<EntityKind> {
        let (x, y) = self.front();
        match self.cell(x, y) {
            Cell::Item(k) => Some(k),
            _ => None,
        }
    }

    /// Entity kind the agent is facing, for symbolic `facing` facts. Air and
    /// item cells report as air (items are not obstacles the planner knows).
    pub fn facing_kind(&self) -> Option<EntityKind> {
        let (x, y) = self.front();
        match self.cell(x, y) {
            Cell::Wall => Some(EntityKind::Wall),
            Cell::Tree => Some(EntityKind::TreeLog),
            Cell::CraftingTable => Some(EntityKind::CraftingTable),
            Cell::RubberTree => Some(EntityKind::RubberTree),
            Cell::PlacedTap => Some(EntityKind::TreeTap),
            Cell::Air | Cell::Item(_) => None,
        }
    }

    /// Executes one primitive action. Every call consumes one timestep,
    /// including failed actions — wasted time is real time.
    pub fn step(&mut self, action: Action) -> Result<Vec<Event>, WorldError> {
        if self.episode_over() {
            return Err(WorldError::EpisodeOver);
        }
        self.step_count += 1;
        let events = match action {
            Action::TurnLeft => {
                self.heading = self.heading.left();
                alloc::vec![Event::Turned]
            }
            Action::TurnRight => {
                self.heading = self.heading.right();
                alloc::vec![Event::Turned]
            }
            Action::MoveForward => {
                let (x, y) = self.front();
                match self.cell(x, y) {
                    Cell::Air => {
                        self.agent = (x, y);
                        alloc::vec![Event::Moved]
                    }
                    Cell::Item(k) => {
                        self.agent = (x, y);
                        self.set_cell(x, y, Cell::Air);
                        self.add(k, 1);
                        alloc::vec![Event::Moved, Event::PickedUp(k)]
                    }
                    _ => alloc::vec![Event::Blocked],
                }
            }
            Action::Break => self.do_break(),
            Action::ExtractRubber => self.do_extract(),
            Action::CraftPlanks => {
                if self.count(EntityKind::TreeLog) >= 1 {
                    self.add(EntityKind::TreeLog, -1);
                    self.add(EntityKind::Plank, 4);
                    alloc::vec![Event::Crafted(EntityKind::Plank)]
                } else {
                    alloc::vec![Event::ActionFailed]
                }
            }
            Action::CraftStick => {
                if self.count(EntityKind::Plank) >= 2 {
                    self.add(EntityKind::Plank, -2);
                    self.add(EntityKind::Stick, 4);
                    alloc::vec![Event::Crafted(EntityKind::Stick)]
                } else {
                    alloc::vec![Event::ActionFailed]
                }
            }
            Action::CraftTreeTap => {
                if self.table_craft_allowed()
                    && self.count(EntityKind::Plank) >= 5
                    && self.count(EntityKind::Stick) >= 1
                {
                    self.add(EntityKind::Plank, -5);
                    self.add(EntityKind::Stick, -1);
                    self.add(EntityKind::TreeTap, 1);
                    alloc::vec![Event::Crafted(EntityKind::TreeTap)]
                } else {
                    alloc::vec![Event::ActionFailed]
                }
            }
            Action::CraftPogoStick => {
                if self.table_craft_allowed()
                    && self.count(EntityKind::Plank) >= 2
                    && self.count(EntityKind::Stick) >= 4
                    && self.count(EntityKind::Rubber) >= 1
                {
                    self.add(EntityKind::Plank, -2);
                    self.add(EntityKind::Stick, -4);
                    self.add(EntityKind::Rubber, -1);
                    self.add(EntityKind::PogoStick, 1);
                    alloc::vec![Event::Crafted(EntityKind::PogoStick)]
                } else {
                    alloc::vec![Event::ActionFailed]
                }
            }
            Action::Select(k) => {
                if self.count(k) >= 1 {
                    self.selected = Some(k);
                    alloc::vec![Event::Selected(k)]
                } else {
                    alloc::vec![Event::ActionFailed]
                }
            }
            Action::Approach(_) => {
                // Approach is a macro; run it through [`World::approach`].
                // As a raw step it costs the timestep and does nothing.
                alloc::vec![Event::ActionFailed]
            }
            Action::Spray => {
                let (x, y) = self.front();
                if self.is_burning(x, y)
                    && self.selected == Some(EntityKind::Water)
                    && self.count(EntityKind::Water) >= 1
                {
                    self.burning.retain(|c| *c != (x, y));
                    self.add(EntityKind::Water, -1);
                    alloc::vec![Event::Extinguished]
                } else {
                    alloc::vec![Event::ActionFailed]
                }
            }
            Action::PlaceTreeTap => {
                let (x, y) = self.front();
                let next_to_rubber_tree = COMPASS
                    .iter()
                    .any(|(dx, dy)| self.cell(x + dx, y + dy) == Cell::RubberTree);
                if self.cell(x, y) == Cell::Air
                    && next_to_rubber_tree
                    && self.count(EntityKind::TreeTap) >= 1
                {
                    self.set_cell(x, y, Cell::PlacedTap);
                    self.add(EntityKind::TreeTap, -1);
                    alloc::vec![Event::TapPlaced]
                } else {
                    alloc::vec![Event::ActionFailed]
                }
            }
            Action::ScrapePlank => {
                if self.config.scrape_enabled && self.cell_front_is(Cell::Tree) {
                    self.add(EntityKind::Plank, 4);
                    alloc::vec![Event::Scraped]
                } else {
                    alloc::vec![Event::ActionFailed]
                }
            }
        };
        Ok(events)
    }

    fn cell_front_is(&self, c: Cell) -> bool {
        let (x, y) = self.front();
        self.cell(x, y) == c
    }

    fn table_craft_allowed(&self) -> bool {
        let (x, y) = self.front();
        self.cell(x, y) == Cell::CraftingTable && !self.is_burning(x, y)
    }

    fn do_break(&mut self) -> Vec<Event> {
        if !self.cell_front_is(Cell::Tree) || self.config.break_disabled {
            return alloc::vec![Event::ActionFailed];
        }
        if self.config.break_requires_axe && self.selected != Some(EntityKind::Axe) {
            return alloc::vec![Event::ActionFailed];
        }
        let (x, y) = self.front();
        self.set_cell(x, y, Cell::Air);
        self.add(EntityKind::TreeLog, 1);
        alloc::vec![Event::Broke]
    }

    fn do_extract(&mut self) -> Vec<Event> {
        let ok = match self.config.extract {
            ExtractRule::FromTree => {
                self.cell_front_is(Cell::Tree)
                    && self.selected == Some(EntityKind::TreeTap)
                    && self.count(EntityKind::TreeTap) >= 1
            }
            ExtractRule::FromRubberTree => {
                self.cell_front_is(Cell::RubberTree)
                    && self.selected == Some(EntityKind::TreeTap)
                    && self.count(EntityKind::TreeTap) >= 1
            }
            ExtractRule::FromPlacedTap => self.cell_front_is(Cell::PlacedTap),
        };
        if ok {
            self.add(EntityKind::Rubber, 1);
            alloc::vec![Event::Extracted]
        } else {
            alloc::vec![Event::ActionFailed]
        }
    }

    /// The observation vector: per lexicon entity 8 beam distances, then per
    /// entity the raw inventory count, then a selected-item one-hot whose
    /// final slot means "nothing selected".
    pub fn observe(&self) -> Vec<f64> {
        let (w, h) = (self.config.width as f64, self.config.height as f64);
        let diag = fmath::sqrt(w * w + h * h);
        let mut obs = Vec::with_capacity(self.config.observation_len());
        for kind in &self.lexicon {
            for beam in 0..8 {
                let dir = COMPASS[(self.heading.index() * 2 + beam) % 8];
                obs.push(self.ray(*kind, dir, diag));
            }
        }
        for kind in &self.lexicon {
            obs.push(self.count(*kind) as f64);
        }
        for kind in &self.lexicon {
            obs.push(if self.selected == Some(*kind) { 1.0 } else { 0.0 });
        }
        obs.push(if self.selected.is_none() { 1.0 } else { 0.0 });
        obs
    }

    /// Marches one beam: distance to the first cell of `kind` along `dir`,
    /// normalized by the arena diagonal; 1.0 if a wall comes first. Diagonal
    /// steps count √2.
    fn ray(&self, kind: EntityKind, dir: (i32, i32), diag: f64) -> f64 {
        let step_len = if dir.0 != 0 && dir.1 != 0 { fmath::sqrt(2.0) } else { 1.0 };
        let (mut x, mut y) = self.agent;
        let mut dist = 0.0;
        loop {
            x += dir.0;
            y += dir.1;
            dist += step_len;
            if self.cell_has_kind(x, y, kind) {
                return if dist >= diag { 1.0 } else { dist / diag };
            }
            if self.cell(x, y) == Cell::Wall {
                return 1.0;
            }
        }
    }

    /// Plans the primitive route to stand adjacent to (and face) the nearest
    /// instance of `kind`, without executing it. Pure breadth-first search
    /// over (position, heading) with unit-cost turns and moves.
    pub fn approach_route(&self, kind: EntityKind) -> Result<Vec<Action>, ApproachError> {
        let mut has_target = false;
        'outer: for y in 0..self.config.height as i32 {
            for x in 0..self.config.width as i32 {
                if self.cell_has_kind(x, y, kind) {
                    has_target = true;
                    break 'outer;
                }
            }
        }
        if !has_target {
            return Err(ApproachError::NoTarget);
        }
        self.route_to(|w, x, y, h| {
            let (dx, dy) = h.delta();
            w.cell_has_kind(x + dx, y + dy, kind)
        })
        .ok_or(ApproachError::NoPath)
    }

    /// Plans the shortest route to a pose satisfying `goal` (agent at (x, y)
    /// with heading h). Returns None if unreachable.
    fn route_to(
        &self,
        goal: impl Fn(&World, i32, i32, Heading) -> bool,
    ) -> Option<Vec<Action>> {
        let w = self.config.width;
        let idx = |x: i32, y: i32, h: Heading| (y as usize * w + x as usize) * 4 + h.index();
        let mut back: Vec<Option<(usize, Action)>> =
            alloc::vec![None; w * self.config.height * 4];
        let start = idx(self.agent.0, self.agent.1, self.heading);
        if goal(self, self.agent.0, self.agent.1, self.heading) {
            return Some(Vec::new());
        }
        back[start] = Some((start, Action::TurnLeft)); // sentinel marks visited
        let mut queue: alloc::collections::VecDeque<(i32, i32, Heading)> =
            alloc::collections::VecDeque::new();
        queue.push_back((self.agent.0, self.agent.1, self.heading));
        while let Some((x, y, h)) = queue.pop_front() {
            let here = idx(x, y, h);
            let (dx, dy) = h.delta();
            let successors: [(i32, i32, Heading, Action); 3] = [
                (x, y, h.left(), Action::TurnLeft),
                (x, y, h.right(), Action::TurnRight),
                (x + dx, y + dy, h, Action::MoveForward),
            ];
            for (nx, ny, nh, act) in successors {
                if act == Action::MoveForward && self.cell(nx, ny) != Cell::Air {
                    continue;
                }
                let ni = idx(nx, ny, nh);
                if back[ni].is_some() {
                    continue;
                }
                back[ni] = Some((here, act));
                if goal(self, nx, ny, nh) {
                    // Reconstruct.
                    let mut actions = alloc::vec![act];
                    let mut at = here;
                    while at != start {
                        let (prev, a) = back[at].unwrap();
                        actions.push(a);
                        at = prev;
                    }
                    actions.reverse();
                    return Some(actions);
                }
                queue.push_back((nx, ny, nh));
            }
        }
        None
    }

    /// Plans a route to face any air cell (used to realize symbolic
    /// approaches whose destination is air).
    pub fn face_air_route(&self) -> Result<Vec<Action>, ApproachError> {
        self.route_to(|w, x, y, h| {
            let (dx, dy) = h.delta();
            matches!(w.cell(x + dx, y + dy), Cell::Air | Cell::Item(_))
        })
        .ok_or(ApproachError::NoPath)
    }

    /// Plans a route to face an air cell that touches a rubber tree (a legal
    /// tap placement site). Errors with NoTarget if no rubber tree exists.
    pub fn tap_site_route(&self) -> Result<Vec<Action>, ApproachError> {
        let mut has_tree = false;
        'outer: for y in 0..self.config.height as i32 {
            for x in 0..self.config.width as i32 {
                if self.cell(x, y) == Cell::RubberTree {
                    has_tree = true;
                    break 'outer;
                }
            }
        }
        if !has_tree {
            return Err(ApproachError::NoTarget);
        }
        self.route_to(|w, x, y, h| {
            let (dx, dy) = h.delta();
            let (fx, fy) = (x + dx, y + dy);
            w.cell(fx, fy) == Cell::Air
                && COMPASS.iter().any(|(cx, cy)| w.cell(fx + cx, fy + cy) == Cell::RubberTree)
        })
        .ok_or(ApproachError::NoPath)
    }

    /// Runs an approach macro: plans the route and executes it. Returns the
    /// primitive actions actually executed; `completed` is false if the
    /// horizon expired mid-route.
    pub fn approach(&mut self, kind: EntityKind) -> Result<ApproachRun, ApproachError> {
        let route = self.approach_route(kind)?;
        Ok(self.run_route(route))
    }

    /// Executes a precomputed route until done or the horizon expires.
    pub fn run_route(&mut self, route: Vec<Action>) -> ApproachRun {
        let mut executed = Vec::new();
        for a in route {
            if self.step(a).is_err() {
                return ApproachRun { actions: executed, completed: false };
            }
            executed.push(a);
        }
        ApproachRun { actions: executed, completed: true }
    }

    /// ASCII rendering for debugging: border walls, entities, the agent as
    /// an arrow showing its heading.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for y in 0..self.config.height as i32 {
            for x in 0..self.config.width as i32 {
                if (x, y) == self.agent {
                    out.push(match self.heading {
                        Heading::North => '^',
                        Heading::East => '>',
                        Heading::South => 'v',
                        Heading::West => '<',
                    });
                    continue;
                }
                out.push(match self.cell(x, y) {
                    Cell::Air => '.',
                    Cell::Wall => '#',
                    Cell::Tree => 'T',
                    Cell::CraftingTable => {
                        if self.is_burning(x, y) {
                            '&'
                        } else {
                            'C'
                        }
                    }
                    Cell::RubberTree => 'R',
                    Cell::Item(EntityKind::Axe) => 'a',
                    Cell::Item(EntityKind::Water) => 'w',
                    Cell::Item(_) => '?',
                    Cell::PlacedTap => 't',
                });
            }
            out.push('\n');
        }
        out
    }
}

/// Result of executing an approach macro.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApproachRun {
    /// Primitive actions executed, in order.
    pub actions: Vec<Action>,
    /// False if the horizon expired before the route finished.
    pub completed: bool,
}
