#include "heapforest/heap_sort.hpp"

#include <algorithm>
#include <stdexcept>

#include "json.hpp"

namespace heapforest {

SortState::SortState(bool track_dead) : track_dead_(track_dead) {}

InsertOutcome SortState::insert(double label, uint32_t lives) {
  return insert_at(label, lives, static_cast<double>(vertices_.size() + 1));
}

InsertOutcome SortState::insert_at(double label, uint32_t lives, double time) {
  if (lives == 0) throw std::invalid_argument("insert: lives must be >= 1");
  if (all_by_label_.count(label)) throw std::invalid_argument("insert: duplicate label");
  if (!vertices_.empty() && !(time > last_time_))
    throw std::invalid_argument("insert: times must be strictly increasing");

  const uint32_t id = static_cast<uint32_t>(vertices_.size());
  VertexRecord v;
  v.label = label;
  v.initial_lives = v.remaining_lives = lives;
  v.arrival_index = id;
  v.birth_time = time;

  InsertOutcome out;
  out.id = id;

  auto it = alive_.lower_bound(label);
  if (it == alive_.begin()) {
    out.created_root = true;
    ++root_count_;
    root_times_.push_back(time);
  } else {
    --it;
    const uint32_t pid = it->second;
    VertexRecord& p = vertices_[pid];
    v.parent = pid;
    out.parent = pid;
    p.children.push_back(id);
    if (--p.remaining_lives == 0) {
      p.death_time = time;
      p.killer = id;
      if (track_dead_) dead_labels_.insert(p.label);
      alive_.erase(it);
    }
  }

  alive_.emplace(label, id);
  all_by_label_.emplace(label, id);
  vertices_.push_back(std::move(v));
  last_time_ = time;
  max_label_ = std::max(max_label_, label);
  return out;
}

uint32_t SortState::find_father(double below_label, double at_time) const {
  // Largest label < below_label whose vertical line is solid at at_time.
  // The walk crosses only lines that are dotted at that height, so its cost
  // is part of the particle path length.
  auto it = all_by_label_.lower_bound(below_label);
  while (it != all_by_label_.begin()) {
    --it;
    const VertexRecord& w = vertices_[it->second];
    if (w.birth_time < at_time && w.death_time > at_time) return it->second;
  }
  return kNoVertex;
}

RightInsertOutcome SortState::insert_rightmost(const Atom& atom, double horizon) {
  if (atom.lives == 0) throw std::invalid_argument("insert_rightmost: lives must be >= 1");
  if (!vertices_.empty() && !(atom.label > max_label_))
    throw std::invalid_argument("insert_rightmost: label must exceed every existing label");
  if (!(atom.time > 0.0) || atom.time > horizon)
    throw std::invalid_argument("insert_rightmost: time outside (0, horizon]");
  if (!(last_time_ <= horizon))
    throw std::invalid_argument("insert_rightmost: state extends past horizon");

  const uint32_t new_id = static_cast<uint32_t>(vertices_.size());
  {
    VertexRecord v;
    v.label = atom.label;
    v.initial_lives = v.remaining_lives = atom.lives;
    v.arrival_index = new_id;
    v.birth_time = atom.time;
    vertices_.push_back(std::move(v));
    alive_.emplace(atom.label, new_id);
    all_by_label_.emplace(atom.label, new_id);
    max_label_ = atom.label;
    last_time_ = std::max(last_time_, atom.time);
  }

  RightInsertOutcome out;
  out.id = new_id;
  out.path.push_back({atom.label, atom.time});

  uint32_t displaced = new_id;  // vertex currently seeking a father
  double cur_x = atom.label;
  double cur_t = atom.time;

  for (;;) {
    const uint32_t fid = find_father(cur_x, cur_t);
    if (fid == kNoVertex) {
      // Exits through the left side: the displaced vertex founds a tree and
      // nobody loses a life.
      out.created_root = true;
      vertices_[displaced].parent = kNoVertex;
      ++root_count_;
      root_times_.insert(
          std::upper_bound(root_times_.begin(), root_times_.end(), cur_t), cur_t);
      out.path.push_back({-std::numeric_limits<double>::infinity(), cur_t});
      return out;
    }

    VertexRecord& w = vertices_[fid];
    out.path.push_back({w.label, cur_t});
    vertices_[displaced].parent = fid;
    w.children.push_back(displaced);

    if (w.death_time == kNeverDies) {
      // Father survives to the horizon: it absorbs the chain, losing one life.
      if (--w.remaining_lives == 0) {
        double death = 0.0;
        uint32_t killer = kNoVertex;
        for (uint32_t c : w.children) {
          if (vertices_[c].birth_time > death) {
            death = vertices_[c].birth_time;
            killer = c;
          }
        }
        w.death_time = death;
        w.killer = killer;
        alive_.erase(w.label);
        if (track_dead_) dead_labels_.insert(w.label);
      }
      out.path.push_back({w.label, horizon});
      return out;
    }

    // Father had already spent its last life at death_time; taking in the
    // chain's vertex evicts the child that consumed it. Its line goes dotted
    // earlier now: at the birth of the latest remaining child.
    const double td = w.death_time;
    const uint32_t evicted = w.killer;
    out.path.push_back({w.label, td});

    w.children.erase(std::find(w.children.begin(), w.children.end(), evicted));
    double death = 0.0;
    uint32_t killer = kNoVertex;
    for (uint32_t c : w.children) {
      if (vertices_[c].birth_time > death) {
        death = vertices_[c].birth_time;
        killer = c;
      }
    }
    w.death_time = death;
    w.killer = killer;

    displaced = evicted;
    cur_x = w.label;
    cur_t = td;
  }
}

uint64_t SortState::leading_dead() const {
  if (!track_dead_)
    throw std::logic_error("leading_dead: dead-label tracking is disabled");
  if (alive_.empty()) return vertices_.size();
  const double min_alive = alive_.begin()->first;
  uint64_t count = 0;
  for (double d : dead_labels_) {
    if (d >= min_alive) break;
    ++count;
  }
  return count;
}

std::vector<uint32_t> SortState::life_word() const {
  std::vector<uint32_t> word;
  word.reserve(vertices_.size());
  for (const auto& [label, id] : all_by_label_)
    word.push_back(vertices_[id].remaining_lives);
  return word;
}

SortState sort_items(const std::vector<std::pair<double, uint32_t>>& items,
                     bool track_dead) {
  SortState state(track_dead);
  for (const auto& [label, lives] : items) state.insert(label, lives);
  return state;
}

SortState sort_atoms(const std::vector<Atom>& atoms, bool track_dead) {
  SortState state(track_dead);
  for (const Atom& a : atoms) state.insert_at(a.label, a.lives, a.time);
  return state;
}

RootCounter::RootCounter(bool track_dead) : track_dead_(track_dead) {}

bool RootCounter::insert(double label, uint32_t lives) {
  if (lives == 0) throw std::invalid_argument("insert: lives must be >= 1");
  ++n_;
  auto it = alive_.lower_bound(label);
  bool root = false;
  if (it == alive_.begin()) {
    root = true;
    ++root_count_;
  } else {
    --it;
    if (--it->second == 0) {
      if (track_dead_) dead_labels_.insert(it->first);
      alive_.erase(it);
    }
  }
  alive_.emplace(label, lives);
  return root;
}

uint64_t RootCounter::leading_dead() const {
  if (!track_dead_)
    throw std::logic_error("leading_dead: dead-label tracking is disabled");
  if (alive_.empty()) return n_;
  const double min_alive = alive_.begin()->first;
  uint64_t count = 0;
  for (double d : dead_labels_) {
    if (d >= min_alive) break;
    ++count;
  }
  return count;
}

uint64_t root_count_of_atoms(std::vector<Atom> atoms) {
  std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) {
    return a.time != b.time ? a.time < b.time : a.label < b.label;
  });
  RootCounter counter;
  for (const Atom& a : atoms) counter.insert(a.label, a.lives);
  return counter.root_count();
}

uint64_t longest_decreasing_subsequence(const std::vector<double>& labels) {
  // Patience piles on negated values: strictly increasing tails.
  std::vector<double> tails;
  for (double x : labels) {
    const double v = -x;
    auto it = std::lower_bound(tails.begin(), tails.end(), v);
    if (it == tails.end())
      tails.push_back(v);
    else
      *it = v;
  }
  return tails.size();
}

namespace {

void bruteforce_rec(const std::vector<std::pair<double, uint32_t>>& items,
                    std::size_t i, std::vector<uint32_t>& used,
                    uint64_t trees, uint64_t& best) {
  if (trees >= best) return;  // trees never decreases
  if (i == items.size()) {
    best = trees;
    return;
  }
  const double label = items[i].first;
  for (std::size_t j = 0; j < i; ++j) {
    if (items[j].first < label && used[j] < items[j].second) {
      ++used[j];
      bruteforce_rec(items, i + 1, used, trees, best);
      --used[j];
    }
  }
  bruteforce_rec(items, i + 1, used, trees + 1, best);
}

}  // namespace

uint64_t min_heaps_bruteforce(
    const std::vector<std::pair<double, uint32_t>>& items) {
  if (items.size() > 12)
    throw std::invalid_argument("min_heaps_bruteforce: n > 12");
  for (std::size_t i = 0; i < items.size(); ++i)
    for (std::size_t j = i + 1; j < items.size(); ++j)
      if (items[i].first == items[j].first)
        throw std::invalid_argument("min_heaps_bruteforce: duplicate label");
  uint64_t best = items.size();
  if (items.empty()) return 0;
  std::vector<uint32_t> used(items.size(), 0);
  bruteforce_rec(items, 0, used, 0, best);
  return best;
}

std::vector<uint64_t> life_sweep(const std::vector<double>& labels,
                                 const std::vector<uint32_t>& base_lives,
                                 std::size_t i0, uint32_t m_max) {
  if (labels.size() != base_lives.size())
    throw std::invalid_argument("life_sweep: size mismatch");
  if (i0 >= labels.size()) throw std::invalid_argument("life_sweep: i0 out of range");
  if (m_max == 0) throw std::invalid_argument("life_sweep: m_max must be >= 1");
  std::vector<uint64_t> counts;
  counts.reserve(m_max);
  std::vector<std::pair<double, uint32_t>> items(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i)
    items[i] = {labels[i], base_lives[i]};
  for (uint32_t m = 1; m <= m_max; ++m) {
    items[i0].second = m;
    counts.push_back(sort_items(items).root_count());
  }
  return counts;
}

std::string forest_to_json(const SortState& state) {
  nlohmann::ordered_json j;
  j["n"] = state.size();
  j["root_count"] = state.root_count();
  auto& verts = j["vertices"] = nlohmann::ordered_json::array();
  for (const VertexRecord& v : state.vertices()) {
    nlohmann::ordered_json jv;
    jv["id"] = v.arrival_index;
    jv["label"] = v.label;
    jv["initial_lives"] = v.initial_lives;
    jv["remaining_lives"] = v.remaining_lives;
    if (v.parent == kNoVertex)
      jv["parent"] = nullptr;
    else
      jv["parent"] = v.parent;
    jv["arrival_index"] = v.arrival_index;
    verts.push_back(std::move(jv));
  }
  return j.dump(2) + "\n";
}

}  // namespace heapforest
