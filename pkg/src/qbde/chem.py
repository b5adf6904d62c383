"""SMILES-subset parser and bond descriptors.

Supported: organic-subset atoms (B C N O P S F Cl Br I), aromatic b c n o p s,
bracket atoms with explicit H count and charge, bonds ``- = # :``, branches
and ring closures (single digit or ``%nn``).  Stereo marks, isotopes, atom
classes and dot-disconnected fragments are rejected with a :class:`ParseError`.

Hydrogens are materialized: after the parsed heavy-atom bonds come the X-H
bonds, grouped by heavy-atom index.  A bond index therefore addresses C-H
bonds as well, e.g. in ``CC`` bond 0 is C-C and bonds 1..6 are C-H.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .errors import ParseError, RecordError

AROMATIC = 1.5

ATOMIC_NUMBER = {
    "H": 1, "B": 5, "C": 6, "N": 7, "O": 8, "F": 9, "Si": 14, "P": 15, "S": 16,
    "Cl": 17, "Se": 34, "Br": 35, "I": 53,
}
ORGANIC = ("Cl", "Br", "B", "C", "N", "O", "P", "S", "F", "I")
AROMATIC_SYMBOLS = {"b": "B", "c": "C", "n": "N", "o": "O", "p": "P", "s": "S", "se": "Se"}
VALENCES = {
    "B": (3,), "C": (4,), "N": (3,), "O": (2,), "P": (3, 5), "S": (2, 4, 6),
    "F": (1,), "Cl": (1,), "Br": (1,), "I": (1,),
}
BOND_SYMBOLS = {"-": 1.0, "=": 2.0, "#": 3.0, ":": AROMATIC}
ORDER_SYMBOL = {1.0: "-", 2.0: "=", 3.0: "#", AROMATIC: ":"}
HYB_SP, HYB_SP2, HYB_SP3 = 1, 2, 3


@dataclass(frozen=True)
class Atom:
    symbol: str
    z: int
    aromatic: bool = False
    charge: int = 0
    h_count: int = 0
    bracket: bool = False
    offset: int = -1


@dataclass(frozen=True)
class Bond:
    a: int
    b: int
    order: float

    @property
    def aromatic(self) -> bool:
        return self.order == AROMATIC

    def other(self, i: int) -> int:
        return self.b if i == self.a else self.a


@dataclass(frozen=True)
class MolGraph:
    smiles: str
    atoms: tuple[Atom, ...]
    bonds: tuple[Bond, ...]
    n_heavy: int
    n_parsed_bonds: int
    ring_bonds: frozenset[int]

    @property
    def ring_atoms(self) -> frozenset[int]:
        return frozenset(i for k in self.ring_bonds for i in (self.bonds[k].a, self.bonds[k].b))

    def neighbors(self, i: int) -> list[int]:
        return [b.other(i) for b in self.bonds if i in (b.a, b.b)]

    def bonds_of(self, i: int) -> list[Bond]:
        return [b for b in self.bonds if i in (b.a, b.b)]

    def find_bond(self, a: int, b: int) -> int:
        for k, bond in enumerate(self.bonds):
            if {bond.a, bond.b} == {a, b}:
                return k
        raise IndexError(f"no bond between atoms {a} and {b}")


# -- parser -------------------------------------------------------------------


class _Parser:
    def __init__(self, s: str):
        self.s = s
        self.pos = 0
        self.atoms: list[dict] = []
        self.bonds: list[list] = []  # [a, b, order or None, offset]
        self.rings: dict[int, tuple[int, float | None, int]] = {}

    def fail(self, msg, offset=None):
        raise ParseError(msg, self.pos if offset is None else offset)

    def parse(self):
        s = self.s
        if not s:
            self.fail("empty SMILES", 0)
        stack: list[tuple[int, int]] = []  # (atom index, offset of '(')
        prev: int | None = None
        pending: float | None = None
        pending_at = -1
        while self.pos < len(s):
            ch = s[self.pos]
            if ch == "(":
                if prev is None or pending is not None:
                    self.fail("branch must follow an atom")
                stack.append((prev, self.pos))
                self.pos += 1
                if self.pos < len(s) and s[self.pos] == ")":
                    self.fail("empty branch")
            elif ch == ")":
                if not stack:
                    self.fail("unbalanced ')'")
                if pending is not None:
                    self.fail("bond symbol before ')'")
                prev = stack.pop()[0]
                self.pos += 1
            elif ch in BOND_SYMBOLS:
                if prev is None or pending is not None:
                    self.fail(f"unexpected bond symbol {ch!r}")
                pending, pending_at = BOND_SYMBOLS[ch], self.pos
                self.pos += 1
            elif ch.isdigit() or ch == "%":
                if prev is None:
                    self.fail("ring closure before any atom")
                self._ring(prev, pending)
                pending = None
            elif ch in "/\\@":
                self.fail(f"stereochemistry {ch!r} is not supported")
            elif ch == ".":
                self.fail("disconnected fragments are not supported")
            else:
                atom = self._atom()
                if prev is not None:
                    self.bonds.append([prev, atom, pending, pending_at])
                elif pending is not None:
                    self.fail("bond symbol without a preceding atom", pending_at)
                prev, pending = atom, None
        if pending is not None:
            self.fail("dangling bond symbol", pending_at)
        if stack:
            self.fail("unclosed branch", len(s))
        if self.rings:
            num, (_, _, at) = next(iter(self.rings.items()))
            self.fail(f"unmatched ring closure {num}", at)
        return self._finish()

    def _ring(self, prev, pending):
        s, start = self.s, self.pos
        if s[self.pos] == "%":
            digits = s[self.pos + 1:self.pos + 3]
            if len(digits) != 2 or not digits.isdigit():
                self.fail("'%' must be followed by two digits")
            num = int(digits)
            self.pos += 3
        else:
            num = int(s[self.pos])
            self.pos += 1
        if num in self.rings:
            other, order, _ = self.rings.pop(num)
            if other == prev:
                self.fail("ring closure onto the same atom", start)
            if order is not None and pending is not None and order != pending:
                self.fail("conflicting ring-closure bond symbols", start)
            if any({b[0], b[1]} == {other, prev} for b in self.bonds):
                self.fail("ring closure duplicates an existing bond", start)
            self.bonds.append([other, prev, order if order is not None else pending, start])
        else:
            self.rings[num] = (prev, pending, start)

    def _atom(self) -> int:
        s, start = self.s, self.pos
        if s[self.pos] == "[":
            return self._bracket()
        for sym in ORGANIC:
            if s.startswith(sym, self.pos):
                self.pos += len(sym)
                return self._add(sym, False, start)
        ch = s[self.pos]
        if ch in AROMATIC_SYMBOLS and ch != "se":
            self.pos += 1
            return self._add(AROMATIC_SYMBOLS[ch], True, start)
        self.fail(f"unknown symbol {ch!r}")

    def _bracket(self) -> int:
        s, start = self.s, self.pos
        end = s.find("]", start)
        if end < 0:
            self.fail("unterminated bracket atom")
        self.pos += 1
        if self.pos < end and s[self.pos].isdigit():
            self.fail("isotopes are not supported")
        symbol, aromatic = None, False
        for cand in sorted(ATOMIC_NUMBER, key=len, reverse=True):
            if s.startswith(cand, self.pos):
                symbol = cand
                break
        lower2 = s[self.pos:self.pos + 2]
        if symbol is None or (lower2 == "se"):
            for cand in ("se", "b", "c", "n", "o", "p", "s"):
                if s.startswith(cand, self.pos):
                    symbol, aromatic = AROMATIC_SYMBOLS[cand], True
                    break
        if symbol is None:
            self.fail("unknown element in bracket atom")
        self.pos += len(symbol)
        h = 0
        if self.pos < end and s[self.pos] == "@":
            self.fail("stereochemistry '@' is not supported")
        if self.pos < end and s[self.pos] == "H":
            self.pos += 1
            h = 1
            if self.pos < end and s[self.pos].isdigit():
                h = int(s[self.pos])
                self.pos += 1
        charge = 0
        if self.pos < end and s[self.pos] in "+-":
            sign = 1 if s[self.pos] == "+" else -1
            self.pos += 1
            mag = 1
            if self.pos < end and s[self.pos].isdigit():
                mag = int(s[self.pos])
                self.pos += 1
            else:
                while self.pos < end and s[self.pos] == s[self.pos - 1]:
                    mag += 1
                    self.pos += 1
            charge = sign * mag
        if self.pos != end:
            self.fail(f"unsupported bracket atom content {s[self.pos:end]!r}")
        self.pos = end + 1
        return self._add(symbol, aromatic, start, bracket=True, h=h, charge=charge)

    def _add(self, symbol, aromatic, offset, bracket=False, h=0, charge=0) -> int:
        self.atoms.append(dict(symbol=symbol, aromatic=aromatic, offset=offset,
                               bracket=bracket, h=h, charge=charge))
        return len(self.atoms) - 1

    def _finish(self) -> MolGraph:
        bonds = []
        for a, b, order, at in self.bonds:
            both = self.atoms[a]["aromatic"] and self.atoms[b]["aromatic"]
            if order is None:
                order = AROMATIC if both else 1.0
            elif order == AROMATIC and not both:
                self.fail("aromatic bond between non-aromatic atoms", at)
            bonds.append(Bond(a, b, order))
        atoms = []
        for i, spec in enumerate(self.atoms):
            h = spec["h"] if spec["bracket"] else self._implicit_h(i, spec, bonds)
            atoms.append(Atom(spec["symbol"], ATOMIC_NUMBER[spec["symbol"]], spec["aromatic"],
                              spec["charge"], h, spec["bracket"], spec["offset"]))
        n_heavy, n_parsed = len(atoms), len(bonds)
        for i in range(n_heavy):
            for _ in range(atoms[i].h_count):
                atoms.append(Atom("H", 1))
                bonds.append(Bond(i, len(atoms) - 1, 1.0))
        return MolGraph(self.s, tuple(atoms), tuple(bonds), n_heavy, n_parsed,
                        _ring_bonds(len(atoms), bonds))

    def _implicit_h(self, i, spec, bonds) -> int:
        # aromatic bonds count 1 here; the aromatic atom gives up one H below
        used = int(sum(1 if b.order == AROMATIC else b.order for b in bonds if i in (b.a, b.b)))
        allowed = VALENCES[spec["symbol"]]
        target = next((v for v in allowed if v >= used), None)
        if target is None:
            self.fail(f"valence of {spec['symbol']} exceeds {allowed[-1]}", spec["offset"])
        h = target - used
        if spec["aromatic"] and h >= 1:
            h -= 1
        return h


def _ring_bonds(n_atoms: int, bonds: list[Bond]) -> frozenset[int]:
    """Bond indices on a cycle, i.e. every bond that is not a bridge."""
    adj: list[list[tuple[int, int]]] = [[] for _ in range(n_atoms)]
    for k, b in enumerate(bonds):
        adj[b.a].append((b.b, k))
        adj[b.b].append((b.a, k))
    disc = [-1] * n_atoms
    low = [0] * n_atoms
    bridges = set()
    t = 0
    for root in range(n_atoms):
        if disc[root] >= 0:
            continue
        disc[root] = low[root] = t
        t += 1
        stack = [(root, -1, iter(adj[root]))]
        while stack:
            v, via, it = stack[-1]
            advanced = False
            for w, k in it:
                if k == via:
                    continue
                if disc[w] < 0:
                    disc[w] = low[w] = t
                    t += 1
                    stack.append((w, k, iter(adj[w])))
                    advanced = True
                    break
                low[v] = min(low[v], disc[w])
            if advanced:
                continue
            stack.pop()
            if stack:
                parent = stack[-1][0]
                low[parent] = min(low[parent], low[v])
                if low[v] > disc[parent]:
                    bridges.add(via)
    return frozenset(k for k in range(len(bonds)) if k not in bridges)


@lru_cache(maxsize=4096)
def parse_smiles(s: str) -> MolGraph:
    return _Parser(s).parse()


# -- descriptors --------------------------------------------------------------


def assign_hybridization(mol: MolGraph, atom: int) -> int:
    """sp (1) with a triple bond or two doubles, sp2 (2) if aromatic or one double, else sp3 (3)."""
    if not 0 <= atom < len(mol.atoms):
        raise IndexError(f"atom {atom} out of range")
    orders = [b.order for b in mol.bonds_of(atom)]
    doubles = orders.count(2.0)
    if 3.0 in orders or doubles >= 2:
        return HYB_SP
    if mol.atoms[atom].aromatic or AROMATIC in orders or doubles == 1:
        return HYB_SP2
    return HYB_SP3


@dataclass(frozen=True)
class BondRecord:
    smiles: str
    bond_index: int
    bond_type: str
    bde: float
    record_id: str = ""


def _record_bond(record: BondRecord) -> tuple[MolGraph, Bond]:
    try:
        mol = parse_smiles(record.smiles)
    except ParseError as exc:
        raise RecordError(record.record_id, "parse error", str(exc)) from exc
    if not 0 <= record.bond_index < len(mol.bonds):
        raise RecordError(record.record_id, "bad index",
                          f"bond index {record.bond_index} outside 0..{len(mol.bonds) - 1}")
    return mol, mol.bonds[record.bond_index]


def bond_features(mol: MolGraph, bond_index: int) -> tuple[float, ...]:
    """(z_a, z_b, hyb_a, hyb_b, bond_order, env) with z_a >= z_b (tie: hyb_a >= hyb_b)."""
    bond = mol.bonds[bond_index]
    ends = [(mol.atoms[i].z, assign_hybridization(mol, i), i) for i in (bond.a, bond.b)]
    ends.sort(key=lambda e: (e[0], e[1]), reverse=True)
    (za, ha, _), (zb, hb, _) = ends
    env = {n for i in (bond.a, bond.b) for n in mol.neighbors(i)
           if n not in (bond.a, bond.b) and mol.atoms[n].z in (6, 7, 8)}
    return (float(za), float(zb), float(ha), float(hb), float(bond.order), float(len(env)))


def extract_features(record: BondRecord) -> tuple[float, ...]:
    mol, _ = _record_bond(record)
    return bond_features(mol, record.bond_index)


def bond_label(mol: MolGraph, bond_index: int) -> str:
    bond = mol.bonds[bond_index]
    a, b = sorted((mol.atoms[bond.a], mol.atoms[bond.b]), key=lambda at: at.z, reverse=True)
    return f"{a.symbol}{ORDER_SYMBOL[bond.order]}{b.symbol}"


def classify_bond(record: BondRecord) -> str:
    """Class label such as ``C-H``, ``C-C`` or ``O=C`` (heavier element first)."""
    mol, _ = _record_bond(record)
    return bond_label(mol, record.bond_index)
