"""
Rolling three-day dispatch linear program.

Time steps t = 0..71 cover days d, d+1 and d+2. A node is a pair (t, s):
with shared non-anticipativity the hours of d and d+1 have the single node
(t, None) carrying probability 1, and the hours of d+2 carry one node per
scenario s with probability p_s. With scenario non-anticipativity every hour
has one node per scenario. Costs are weighted by the node probability, so the
balance dual of a shared node is directly the marginal cost in EUR/MWh.

Variable and row labels are tuples whose first entry names the family, e.g.
("g", cluster_id, t, s) or ("balance", zone, t, s).
"""

from collections import defaultdict

import numpy as np
from loguru import logger

from pricex.dispatch.instance import HORIZON_HOURS, SHARED_HOURS, ClusterKind, DispatchInstance
from pricex.lp import LinearProgram, LPBuilder

logger = logger.bind(module="dispatch")

TURBINE_MARGIN = 1.1
STORAGE_BOUNDARY = 0.3


class DispatchModelBuilder:
    """Assemble the dispatch LP of one rolling window, one constraint family per method."""

    def __init__(self, inst: DispatchInstance):
        self.inst = inst
        self.b = LPBuilder()
        self.nodes = self._nodes()
        # balance terms per (zone, t, s): var index -> coefficient
        self._balance = defaultdict(dict)

    def _nodes(self) -> list:
        inst = self.inst
        nodes = []
        for t in range(HORIZON_HOURS):
            if inst.nonanticipativity == "shared" and t < SHARED_HOURS:
                nodes.append((t, None, 1.0))
            else:
                nodes.extend((t, s, p) for s, p in enumerate(inst.probabilities))
        return nodes

    def _previous(self, t: int, s):
        """Node preceding (t, s), or None at the start of the horizon."""
        if t == 0:
            return None
        if self.inst.nonanticipativity == "shared" and t - 1 < SHARED_HOURS:
            return (t - 1, None)
        return (t - 1, s)

    def _inject(self, zone: str, t: int, s, var: int, coef: float):
        row = self._balance[(zone, t, s)]
        row[var] = row.get(var, 0.0) + coef

    def _var(self, label, cost=0.0, lower=0.0, upper=np.inf, prob=1.0) -> int:
        return self.b.add_variable(label, cost * prob, lower, upper)

    def build(self) -> LinearProgram:
        for cluster in self.inst.clusters:
            kind = cluster.kind
            if kind is ClusterKind.THERMAL:
                self._add_thermal(cluster)
            elif kind is ClusterKind.RENEWABLE:
                self._add_renewable(cluster)
            elif kind is ClusterKind.STORAGE_MID:
                self._add_storage_mid(cluster)
            elif kind in (ClusterKind.STORAGE_LONG, ClusterKind.HYDRO):
                self._add_water_value_steps(cluster)
        self._add_reserves()
        self._add_chp()
        self._add_flows()
        self._add_balance()
        lp = self.b.build()
        logger.debug(
            f"dispatch LP for day {self.inst.first_day}: {lp.n_vars} variables, "
            f"{lp.n_eq} equality and {lp.n_ub} inequality rows"
        )
        return lp

    def _add_thermal(self, c):
        avail = c.available
        adder = c.partload_adder
        pon = {}
        for t, s, p in self.nodes:
            g = self._var(("g", c.id, t, s), c.vc_full[t] - adder[t], prob=p)
            on = self._var(("pon", c.id, t, s), adder[t], upper=avail[t], prob=p)
            su = self._var(("su", c.id, t, s), c.startup_cost, prob=p)
            pon[(t, s)] = on
            self._inject(c.zone, t, s, g, 1.0)

            running = {g: 1.0, on: -1.0}
            minload = {g: -1.0, on: c.g_min}
            if c.reserve:
                for kind in ("pcr", "scr_pos", "scr_neg"):
                    r = self._reserve_var(c, kind, t, s)
                    if kind != "scr_neg":
                        running[r] = running.get(r, 0.0) + 1.0
                    if kind != "scr_pos":
                        minload[r] = minload.get(r, 0.0) + 1.0
            self.b.add_ub(("running", c.id, t, s), running, 0.0)
            self.b.add_ub(("minload", c.id, t, s), minload, 0.0)

            prev = self._previous(t, s)
            if prev is not None:
                self.b.add_lb(("startup", c.id, t, s), {su: 1.0, on: -1.0, pon[prev]: 1.0}, 0.0)
            elif self.inst.initial_pon is not None and c.id in self.inst.initial_pon:
                self.b.add_lb(
                    ("startup", c.id, t, s),
                    {su: 1.0, on: -1.0},
                    -float(self.inst.initial_pon[c.id]),
                )

    def _block_key(self, t: int, s):
        block = t // self.inst.block_hours
        return block, s

    def _reserve_var(self, c, kind: str, t: int, s) -> int:
        block, group = self._block_key(t, s)
        label = (kind, c.id, block, group)
        try:
            return self.b.index(label)
        except KeyError:
            return self._var(label)

    def _add_reserves(self):
        inst = self.inst
        requirement = {
            "pcr": lambda z: z.reserve_primary,
            "scr_pos": lambda z: z.reserve_sec_pos,
            "scr_neg": lambda z: z.reserve_sec_neg,
        }
        blocks = {}
        for t, s, p in self.nodes:
            blocks.setdefault(self._block_key(t, s), p)

        for zone in inst.zones:
            providers = [
                c
                for c in inst.clusters
                if c.zone == zone.zone and c.reserve and c.kind is ClusterKind.THERMAL
            ]
            for kind, amount in requirement.items():
                need = amount(zone)
                if need == 0 and not providers:
                    continue
                for (block, group), p in blocks.items():
                    short = self._var(("short", kind, zone.zone, block, group), inst.voll, prob=p)
                    coefs = {short: 1.0}
                    for c in providers:
                        coefs[self.b.index((kind, c.id, block, group))] = 1.0
                    self.b.add_eq(("reserve", kind, zone.zone, block, group), coefs, need)

    def _add_renewable(self, c):
        feed_in = c.cap * c.res_profile
        for t, s, p in self.nodes:
            g = self._var(("g", c.id, t, s), c.vc_full[t], prob=p)
            curt = self._var(("curt", c.id, t, s), self.inst.curtc, prob=p)
            self.b.add_eq(("res", c.id, t, s), {g: 1.0, curt: 1.0}, feed_in[t])
            self._inject(c.zone, t, s, g, 1.0)

    def _add_storage_mid(self, c):
        energy = c.energy_capacity
        level = {}
        for t, s, p in self.nodes:
            boundary = STORAGE_BOUNDARY * energy[t]
            fixed = t == 0 or t == HORIZON_HOURS - 1
            sl = self._var(
                ("sl", c.id, t, s),
                lower=boundary if fixed else 0.0,
                upper=boundary if fixed else energy[t],
            )
            g = self._var(("g", c.id, t, s), c.vc_full[t], prob=p)
            cm = self._var(("cm", c.id, t, s))
            level[(t, s)] = sl

            prev = self._previous(t, s)
            coefs = {sl: 1.0, g: 1.0, cm: -c.efficiency}
            rhs = 0.0
            # the level before hour 0 is the boundary as well, so with SL[0] fixed
            # the first hour of the window carries no net storage flow
            if prev is None:
                rhs = boundary
            else:
                coefs[level[prev]] = -1.0
            self.b.add_eq(("storage", c.id, t, s), coefs, rhs)
            self.b.add_ub(("turbine", c.id, t, s), {g: 1.0, cm: TURBINE_MARGIN}, c.cap[t])

            self._inject(c.zone, t, s, g, 1.0)
            self._inject(c.zone, t, s, cm, -1.0)

    def _add_water_value_steps(self, c):
        avail = c.available
        wv = c.water_value
        for t, s, p in self.nodes:
            total = {}
            for k, (share, markup) in enumerate(c.wv_steps):
                g = self._var(
                    ("gstep", c.id, k, t, s), wv[t] + markup, upper=share * avail[t], prob=p
                )
                total[g] = 1.0
                self._inject(c.zone, t, s, g, 1.0)
            if c.kind is ClusterKind.STORAGE_LONG:
                cl = self._var(("cl", c.id, t, s), -wv[t], upper=c.cap[t], prob=p)
                total[cl] = 1.0
                self._inject(c.zone, t, s, cl, -1.0)
                self.b.add_ub(("stl_cap", c.id, t, s), total, c.cap[t])

    def _add_chp(self):
        for zone in self.inst.zones:
            if not np.any(zone.chp_mustrun > 0):
                continue
            chp_ids = [c.id for c in self.inst.clusters if c.zone == zone.zone and c.chp]
            for t, s, _ in self.nodes:
                if zone.chp_mustrun[t] <= 0:
                    continue
                coefs = {}
                for cid in chp_ids:
                    coefs.update(self._generation_vars(cid, t, s))
                self.b.add_lb(("chp", zone.zone, t, s), coefs, zone.chp_mustrun[t])

    def _generation_vars(self, cid: str, t: int, s) -> dict:
        cluster = next(c for c in self.inst.clusters if c.id == cid)
        if cluster.kind in (ClusterKind.STORAGE_LONG, ClusterKind.HYDRO):
            steps = range(len(cluster.wv_steps))
            return {self.b.index(("gstep", cid, k, t, s)): 1.0 for k in steps}
        if cluster.kind is ClusterKind.BASELOAD:
            return {}
        return {self.b.index(("g", cid, t, s)): 1.0}

    def _add_flows(self):
        ntc = self.inst.ntc
        for a, b in ntc.pairs():
            cap = ntc.capacity(a, b)
            for t, s, _ in self.nodes:
                if cap[t] <= 0:
                    continue
                f = self._var(("flow", a, b, t, s), upper=cap[t])
                self._inject(a, t, s, f, -1.0)
                self._inject(b, t, s, f, 1.0)

    def _add_balance(self):
        inst = self.inst
        baseload = defaultdict(lambda: np.zeros(HORIZON_HOURS))
        for c in inst.clusters:
            if c.kind is ClusterKind.BASELOAD:
                baseload[c.zone] = baseload[c.zone] + c.available

        for zone in inst.zones:
            for t, s, p in self.nodes:
                shed = self._var(("shed", zone.zone, t, s), inst.voll, prob=p)
                surplus = self._var(("surplus", zone.zone, t, s), inst.curtc, prob=p)
                self._inject(zone.zone, t, s, shed, 1.0)
                self._inject(zone.zone, t, s, surplus, -1.0)
                demand = zone.demand[0 if s is None else s, t] - baseload[zone.zone][t]
                terms = self._balance[(zone.zone, t, s)]
                self.b.add_eq(("balance", zone.zone, t, s), terms, demand)


def build_lp(inst: DispatchInstance) -> LinearProgram:
    """
    Dispatch LP of one rolling window.

    Energy balance rows are labelled ("balance", zone, t, s) with t in
    0..71 and s None for shared hours. Load shedding at voll and surplus
    absorption at curtc are always present, so the program is feasible for
    every valid instance.
    """
    return DispatchModelBuilder(inst).build()
