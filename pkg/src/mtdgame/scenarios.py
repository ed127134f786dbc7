"""Built-in three-VM cloud scenario and a seeded generator of layered scenarios."""

from __future__ import annotations

from dataclasses import dataclass

from .attack_graph import AgEdge, AgNode, AttackGraph, EdgeKind, NodeKind, validate_graph
from .catalog import AccessComplexity, VulnRecord, catalog_from_records

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

SERVICES = ("ssh", "http", "ftp", "ldap", "smb", "mysql", "rpc", "dns")


class ScenarioError(ValueError):
    pass


def splitmix64(x: int) -> int:
    z = x & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


class CounterRng:
    """Counter-based stream: draw ``k`` is ``splitmix64(seed + (k + 1) * golden)``.

    Defined bit-for-bit so generated scenarios match across platforms.
    """

    def __init__(self, seed: int, counter: int = 0):
        self.seed = seed & _MASK
        self.counter = counter

    def next_u64(self) -> int:
        self.counter += 1
        return splitmix64(self.seed + self.counter * _GOLDEN)

    def uniform(self) -> float:
        """Float in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def below(self, n: int) -> int:
        return ((self.next_u64() >> 11) * n) >> 53

    def weighted(self, weights) -> int:
        total = sum(weights)
        r = self.uniform() * total
        acc = 0.0
        for i, w in enumerate(weights):
            acc += w
            if r < acc:
                return i
        return max(i for i, w in enumerate(weights) if w > 0)


@dataclass(frozen=True)
class ScenarioSpec:
    seed: int = 0
    n_vms: int = 3
    n_vulns: int = 100
    n_layers: int = 3
    cia_range: tuple[float, float] = (1.0, 10.0)
    ac_weights: tuple[float, float, float] = (0.3, 0.5, 0.2)
    p_local: float = 0.25

    def check(self) -> None:
        if not (isinstance(self.seed, int) and 0 <= self.seed <= _MASK):
            raise ScenarioError("seed must be an unsigned 64-bit integer")
        if self.n_vms < 1 or self.n_vulns < 1 or self.n_layers < 1:
            raise ScenarioError("n_vms, n_vulns and n_layers must all be >= 1")
        if self.n_layers > self.n_vms:
            raise ScenarioError("n_layers cannot exceed n_vms")
        lo, hi = self.cia_range
        if not 0.0 <= lo <= hi <= 10.0:
            raise ScenarioError(f"cia_range {self.cia_range} must lie within [0, 10]")
        if len(self.ac_weights) != 3 or min(self.ac_weights) < 0 or sum(self.ac_weights) <= 0:
            raise ScenarioError("ac_weights must be three nonnegative weights with positive sum")
        if not 0.0 <= self.p_local <= 1.0:
            raise ScenarioError("p_local must be in [0, 1]")


_AC_ORDER = (AccessComplexity.EASY, AccessComplexity.MEDIUM, AccessComplexity.HIGH)


def _draw(spec: ScenarioSpec, rng: CounterRng):
    vms = [f"vm{i}" for i in range(spec.n_vms)]
    layer = {vm: i % spec.n_layers for i, vm in enumerate(vms)}
    by_layer = [[vm for vm in vms if layer[vm] == L] for L in range(spec.n_layers)]
    goal_vm = by_layer[-1][0]
    goal = f"{goal_vm}:root"
    initial = f"{vms[0]}:user"

    nodes = []
    for vm in vms:
        nodes.append(AgNode(f"{vm}:user", NodeKind.PRIVILEGE, f"priv(attacker, ({vm}: user))"))
        kind = NodeKind.GOAL if vm == goal_vm else NodeKind.PRIVILEGE
        nodes.append(AgNode(f"{vm}:root", kind, f"priv(attacker, ({vm}: root))"))

    width = len(str(spec.n_vulns - 1))
    lo, hi = spec.cia_range
    records, edges = [], []
    for k in range(spec.n_vulns):
        key = f"v{k:0{width}d}"
        target = vms[rng.below(len(vms))]
        L = layer[target]
        if L == 0 or rng.uniform() < spec.p_local:
            src, dst = f"{target}:user", f"{target}:root"
        else:
            src_vm = by_layer[L - 1][rng.below(len(by_layer[L - 1]))]
            src = f"{src_vm}:{('user', 'root')[rng.below(2)]}"
            dst = f"{target}:{('user', 'root')[rng.below(2)]}"
        service = SERVICES[rng.below(len(SERVICES))]
        cia = round(lo + (hi - lo) * rng.uniform(), 1)
        ac = _AC_ORDER[rng.weighted(spec.ac_weights)]
        cve = f"CVE-{2010 + rng.below(10)}-{10000 + rng.below(90000)}"
        records.append(VulnRecord(key, cve, target, service, cia, ac))
        ex = f"exploit-{key}"
        nodes.append(AgNode(ex, NodeKind.EXPLOIT, f"execCode({target}, {service})", key))
        edges.append(AgEdge(src, ex, EdgeKind.POST))
        edges.append(AgEdge(ex, dst, EdgeKind.PRE))

    return AttackGraph(tuple(nodes), tuple(edges), initial, goal), catalog_from_records(records)


def generate_scenario(spec: ScenarioSpec, max_attempts: int = 100):
    """Seeded layered scenario: ``(AttackGraph, catalog)``.

    VMs are dealt round-robin into layers. Each vulnerability sits on a
    uniformly chosen VM and is either a local user->root escalation or a
    remote exploit from a VM in the preceding layer. Layer 0 only has local
    escalations. The first VM of the last layer holds the goal (its root).
    Draws whose goal is unreachable are discarded and redrawn from the same
    stream, up to ``max_attempts`` times.
    """
    spec.check()
    rng = CounterRng(spec.seed)
    for _ in range(max_attempts):
        g, cat = _draw(spec, rng)
        if validate_graph(g).ok:
            return g, cat
    raise ScenarioError(f"no valid scenario after {max_attempts} attempts")


def paper_fixture():
    """The LDAP / Web / FTP three-VM scenario with its three known vulnerabilities."""
    records = [
        VulnRecord("dirtycow", "CVE-2016-5195", "LDAP", "Local Priv Esc", 5.0, AccessComplexity.MEDIUM),
        VulnRecord("web-xss", "CVE-2017-5095", "Web", "Cross Site Scripting", 7.0, AccessComplexity.EASY),
        VulnRecord("ftp-rce", "CVE-2015-3306", "FTP", "Remote Code Execution", 10.0, AccessComplexity.MEDIUM),
    ]
    P, G, X = NodeKind.PRIVILEGE, NodeKind.GOAL, NodeKind.EXPLOIT
    nodes = (
        AgNode("LDAP:user", P, "priv(attacker, (LDAP: user))"),
        AgNode("LDAP:root", P, "priv(attacker, (LDAP: root))"),
        AgNode("Web:root", P, "priv(attacker, (Web: root))"),
        AgNode("FTP:root", G, "priv(attacker, (FTP: root))"),
        AgNode("exploit-LDAP", X, "execCode(LDAP)", "dirtycow"),
        AgNode("exploit-Web", X, "execCode(Web)", "web-xss"),
        AgNode("exploit-FTP", X, "execCode(FTP)", "ftp-rce"),
    )
    post, pre = EdgeKind.POST, EdgeKind.PRE
    edges = (
        AgEdge("LDAP:user", "exploit-LDAP", post),
        AgEdge("exploit-LDAP", "LDAP:root", pre),
        AgEdge("LDAP:root", "exploit-Web", post),
        AgEdge("exploit-Web", "Web:root", pre),
        AgEdge("LDAP:root", "exploit-FTP", post),
        AgEdge("Web:root", "exploit-FTP", post),
        AgEdge("exploit-FTP", "FTP:root", pre),
    )
    g = AttackGraph(nodes, edges, "LDAP:user", "FTP:root")
    return g, catalog_from_records(records)
