"""Synthetic reference corpus of labelled bonds.

No experimental BDE table ships with this package, so benchmarks and tests
run on a generated corpus: about 170 small C/H/N/O molecules, every
symmetry-distinct acyclic single bond and X-H bond, labelled by an additive
radical-stabilization model plus per-bond hash-seeded noise.

    BDE(A-B) = D(pair) - S(A.) - S(B.) + conjugation + noise

``D(pair)`` is a reference value for the element pair, ``S`` the
stabilization of each radical fragment (methyl, primary, benzylic, allylic,
phenoxyl, aminyl, ...).  The constants are rounded textbook-style values
chosen so that common bonds land near their familiar magnitudes (CH4 ~105,
benzylic C-H ~89, phenol O-H ~87, aryl C-H ~113).  The six-feature
descriptor sees element, hybridization, order and neighbour counts but not
resonance, so part of the label is systematically invisible to every model.
The noise level is set so that the classical baselines land at a realistic
difficulty (see ``NOISE_SD``).  The corpus is useful for comparing
regressors; it is not a substitute for measured data.
"""

from __future__ import annotations

import csv
from collections import Counter

import numpy as np

from .chem import BondRecord, MolGraph, bond_label, parse_smiles
from .seeding import rng_for

MOLECULES = (
    # alkanes and cycloalkanes
    "C", "CC", "CCC", "CCCC", "CC(C)C", "CCCCC", "CC(C)CC", "CC(C)(C)C", "CCCCCC",
    "CC(C)C(C)C", "C1CCCCC1", "C1CCCC1", "CC1CCCCC1", "C1CCC1", "CCC(C)(C)C",
    # alkenes
    "C=C", "CC=C", "CC=CC", "C=CC=C", "CC(=C)C", "C=CCC", "C=CCC=C", "C1=CCCCC1",
    "C=CC(C)C", "CC(C)=CC", "CCC=CC",
    # aromatics
    "c1ccccc1", "Cc1ccccc1", "CCc1ccccc1", "CC(C)c1ccccc1", "c1ccc(cc1)-c1ccccc1",
    "C(c1ccccc1)c1ccccc1", "Cc1ccc(C)cc1", "Cc1ccccc1C", "C=Cc1ccccc1", "c1ccc2ccccc2c1",
    "Cc1ccncc1", "c1ccncc1", "c1ccoc1", "c1cc[nH]c1", "Cc1ccco1", "CC(C)(C)c1ccccc1",
    "CCCc1ccccc1", "Cc1cccnc1",
    # alcohols
    "CO", "CCO", "CCCO", "CC(C)O", "CC(C)(C)O", "OCCO", "C=CCO", "OCc1ccccc1", "OC1CCCCC1",
    "CCCCO", "CCCCCO", "CC(C)CO", "CC(O)CC", "OCCc1ccccc1", "CCC(C)(C)O", "OCC(O)CO",
    # ethers
    "COC", "CCOCC", "COCC", "C1CCOC1", "COc1ccccc1", "C=COC", "COCCO", "C=CCOC",
    "CCOc1ccccc1", "CC(C)OC(C)C", "CCCOC", "COCCN",
    # phenols
    "Oc1ccccc1", "Cc1ccc(O)cc1", "Oc1ccc(N)cc1", "COc1ccc(O)cc1", "Oc1ccccc1C", "Oc1ccncc1",
    # carbonyls
    "C=O", "CC=O", "CCC=O", "CC(C)=O", "CCC(C)=O", "O=Cc1ccccc1", "CC(=O)c1ccccc1",
    "C=CC=O", "O=C1CCCCC1", "CC(=O)CC(C)=O", "CC=CC=O", "CC(C)CC=O", "CCCCC=O",
    "O=CCc1ccccc1", "Cc1ccc(cc1)C(C)=O", "CC(=O)CO",
    # acids and esters
    "OC=O", "CC(O)=O", "CCC(O)=O", "OC(=O)c1ccccc1", "COC(C)=O", "CCOC(C)=O", "COC=O",
    "CC(=O)OC=C", "OC(=O)CO", "CC(O)C(O)=O", "CCOC=O", "OC(=O)CCC(O)=O", "OC(=O)C=C",
    "COC(=O)C=C", "CC(=C)C(O)=O", "COC(=O)c1ccccc1",
    # amines
    "N", "CN", "CCN", "CNC", "CN(C)C", "CCNCC", "CC(C)N", "NCCO", "NCCN", "Nc1ccccc1",
    "CNc1ccccc1", "NCc1ccccc1", "C1CCNCC1", "C1CCNC1", "C=CCN", "CCN(CC)CC", "CCCN",
    "CCCCN", "C1COCCN1", "Nc1ccc(C)cc1", "OC1CCNCC1", "CC(C)(C)N",
    # amides and amino acids
    "NC=O", "CNC=O", "CC(N)=O", "CNC(C)=O", "NC(=O)c1ccccc1", "CC(N)C(O)=O", "NCC(O)=O",
    "CN(C)C=O", "CC(=O)Nc1ccccc1", "CCC(N)=O",
    # substituted phenols and anilines
    "Oc1cccc(C)c1", "Oc1ccc(C=O)cc1", "Oc1ccc(cc1)C(C)=O", "Oc1ccc(cc1)C(O)=O", "CCc1ccc(O)cc1",
    "CC(C)(C)c1ccc(O)cc1", "Cc1cc(C)c(O)c(C)c1", "Oc1ccc2ccccc2c1", "Oc1ccccc1O",
    "Oc1cccc(O)c1", "Oc1ccc(O)cc1", "CC(C)(C)c1cc(C)cc(C(C)(C)C)c1O", "COc1ccc(N)cc1",
    "Nc1ccc(C=O)cc1", "CNc1ccc(C)cc1", "Nc1cccc(C)c1", "CN(C)c1ccccc1", "Nc1ccccc1C",
    # benzylic, allylic and alpha-heteroatom C-H
    "CC(C)c1ccc(C)cc1", "C(c1ccccc1)(c1ccccc1)c1ccccc1", "C1Cc2ccccc2C1", "C1CCc2ccccc2C1",
    "C1C=CCC=C1", "CC=CCC=C", "C1=CCC=C1", "CCCC=C", "CC(C)C=C", "CC(O)c1ccccc1",
    "COCc1ccccc1", "CC(N)c1ccccc1", "CC(O)C=C",
)

# Aryl and vinyl C-H bonds are hard to measure and scarce in experimental
# compilations; the corpus keeps them for these parent compounds only.
SP2_CH_PARENTS = frozenset(("c1ccccc1", "C=C", "CC=C", "c1ccncc1", "c1ccc2ccccc2c1", "c1ccoc1",
                            "C=CC=C", "C=Cc1ccccc1"))

D_REF = {
    frozenset(("C", "H")): 105.0, frozenset(("C",)): 90.0, frozenset(("C", "O")): 83.0,
    frozenset(("C", "N")): 77.0, frozenset(("O", "H")): 105.0, frozenset(("N", "H")): 100.0,
}
# Unexplained spread (kcal/mol): source-to-source scatter plus every effect
# the descriptor cannot see.  8.0 puts RBF-SVR and random forest at roughly
# MAE 9 and R^2 0.3 on held-out bonds.
NOISE_SD = 8.0
ALKYL_BASE = {0: 0.0, 1: 4.0, 2: 6.5, 3: 8.5}
ALKYL_CAP = 26.0
EXCLUDED_PAIRS = (frozenset(("O",)), frozenset(("N",)), frozenset(("N", "O")))
ELEMENTS = ("H", "C", "N", "O")


def _doubles(mol: MolGraph, i: int, skip: int = -1) -> set[str]:
    return {mol.atoms[b.other(i)].symbol for b in mol.bonds_of(i)
            if b.order == 2.0 and b.other(i) != skip}


def _heavy_nbrs(mol: MolGraph, i: int, skip: int) -> list[int]:
    return [n for n in mol.neighbors(i) if n != skip and mol.atoms[n].z > 1]


def _is_acyl(mol, i):
    return mol.atoms[i].symbol == "C" and "O" in _doubles(mol, i)


def _is_vinylic(mol, i):
    return mol.atoms[i].symbol == "C" and "C" in _doubles(mol, i)


def radical_stabilization(mol: MolGraph, center: int, partner: int) -> float:
    """Stabilization (kcal/mol) of the radical left on ``center`` when its bond to ``partner`` breaks."""
    atom = mol.atoms[center]
    if atom.symbol == "H":
        return 0.0
    nbrs = _heavy_nbrs(mol, center, partner)
    if atom.symbol == "C":
        if atom.aromatic:
            return -8.0
        if _is_vinylic(mol, center):
            return -6.0
        if _is_acyl(mol, center):
            return 15.0
        s = ALKYL_BASE[min(len(nbrs), 3)]
        for n in nbrs:
            other = mol.atoms[n]
            if other.aromatic:
                s += 12.0
            elif _is_vinylic(mol, n):
                s += 13.0
            elif _is_acyl(mol, n):
                s += 5.0
            elif other.symbol == "O":
                s += 5.0
            elif other.symbol == "N":
                s += 8.0
        return min(s, ALKYL_CAP)
    if not nbrs:
        return {"O": -9.0, "N": -8.0}[atom.symbol]
    conj = [n for n in nbrs if mol.atoms[n].aromatic or _is_vinylic(mol, n)]
    acyl = [n for n in nbrs if _is_acyl(mol, n)]
    if atom.symbol == "O":
        if acyl:
            return -7.0
        if conj:
            return 18.0 if mol.atoms[conj[0]].aromatic else 14.0
        return 0.0
    if acyl:
        return -10.0
    if conj:
        return 8.0
    return 4.0 if len(nbrs) >= 2 else 0.0


def conjugation_correction(mol: MolGraph, a: int, b: int) -> float:
    """Extra strength of bonds between an sp2 carbon and an N/O lone pair."""
    for c, x in ((a, b), (b, a)):
        if mol.atoms[x].symbol in ("N", "O") and mol.atoms[c].symbol == "C":
            if _is_acyl(mol, c):
                return 22.0
            if mol.atoms[c].aromatic or _is_vinylic(mol, c):
                return 10.0
    return 0.0


def model_bde(mol: MolGraph, bond_index: int) -> float:
    bond = mol.bonds[bond_index]
    pair = frozenset((mol.atoms[bond.a].symbol, mol.atoms[bond.b].symbol))
    return (D_REF[pair] - radical_stabilization(mol, bond.a, bond.b)
            - radical_stabilization(mol, bond.b, bond.a) + conjugation_correction(mol, bond.a, bond.b))


def eligible(mol: MolGraph, bond_index: int) -> bool:
    bond = mol.bonds[bond_index]
    syms = frozenset((mol.atoms[bond.a].symbol, mol.atoms[bond.b].symbol))
    if not syms <= set(ELEMENTS) or syms in EXCLUDED_PAIRS or syms == frozenset(("H",)):
        return False
    if "H" in syms:
        c = bond.a if mol.atoms[bond.a].symbol != "H" else bond.b
        sp2 = mol.atoms[c].aromatic or _is_vinylic(mol, c)
        return not sp2 or mol.smiles in SP2_CH_PARENTS
    return bond.order == 1.0 and bond_index not in mol.ring_bonds


def _relabel(keys) -> list[int]:
    rank = {k: r for r, k in enumerate(sorted(set(keys)))}
    return [rank[k] for k in keys]


def atom_classes(mol: MolGraph, rounds: int = 6) -> list[int]:
    """Colour refinement over the full graph; equal colours mark symmetry-equivalent atoms."""
    colors = _relabel([(a.symbol, a.aromatic, a.charge) for a in mol.atoms])
    for _ in range(rounds):
        colors = _relabel([(colors[i], tuple(sorted((colors[b.other(i)], b.order)
                                                    for b in mol.bonds_of(i))))
                           for i in range(len(mol.atoms))])
    return colors


def unique_bonds(mol: MolGraph) -> list[int]:
    """One representative (lowest index) of every symmetry class of eligible bonds."""
    colors = atom_classes(mol)
    seen, out = set(), []
    for k, bond in enumerate(mol.bonds):
        if not eligible(mol, k):
            continue
        key = (frozenset((colors[bond.a], colors[bond.b])), bond.order)
        if key not in seen:
            seen.add(key)
            out.append(k)
    return out


def make_corpus(seed: int = 0, noise_sd: float = NOISE_SD, molecules=MOLECULES) -> list[BondRecord]:
    records = []
    for m, smiles in enumerate(molecules):
        mol = parse_smiles(smiles)
        for k in unique_bonds(mol):
            noise = rng_for(seed, "corpus", smiles, k).normal(0.0, noise_sd)
            bde = round(model_bde(mol, k) + noise, 2)
            records.append(BondRecord(smiles, k, bond_label(mol, k), bde, f"m{m:03d}b{k:02d}"))
    return records


def write_corpus_csv(path, records) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["molecule", "bond_index", "bond_type", "bde"])
        for r in records:
            w.writerow([r.smiles, r.bond_index, r.bond_type, f"{r.bde:.2f}"])


def summary(records) -> dict:
    y = np.array([r.bde for r in records])
    return {"n": len(records), "classes": dict(Counter(r.bond_type for r in records).most_common()),
            "min": float(y.min()), "max": float(y.max()), "mean": float(y.mean())}
