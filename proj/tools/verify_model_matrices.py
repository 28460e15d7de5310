#!/usr/bin/env python3
"""Independent numpy check of the matrices in the model zoo.

shunt_mesh: S orthogonal (S^T S = I), |rho| <= 1
diffusion:  entries >= 0, column sums <= 1
saturating: spectral norm <= 1, threshold > 0
"""

import json
import sys

import numpy as np

TOL = 1e-12


def check_model(m):
    kind = m["kind"]
    problems = []
    if kind == "shunt_mesh":
        s = np.asarray(m.get("scattering", 0.5 * np.ones((4, 4)) - np.eye(4)), dtype=float)
        if s.shape != (4, 4):
            problems.append(f"scattering shape {s.shape}")
        else:
            err = np.abs(s.T @ s - np.eye(4)).max()
            if err > TOL:
                problems.append(f"S^T S differs from I by {err:.3g}")
            # a lone node with every port closed keeps |z|
            z = np.random.default_rng(0).standard_normal((4, 64))
            if np.abs(np.linalg.norm(s @ z, axis=0) - np.linalg.norm(z, axis=0)).max() > 1e-12:
                problems.append("S does not preserve the Euclidean norm")
        if abs(m["rho"]) > 1:
            problems.append(f"|rho| = {abs(m['rho'])} > 1")
    elif kind == "diffusion":
        d = np.asarray(m["matrix"], dtype=float)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            problems.append(f"matrix shape {d.shape}")
        else:
            if d.min() < 0:
                problems.append(f"negative entry {d.min()}")
            if d.sum(axis=0).max() > 1 + TOL:
                problems.append(f"column sum {d.sum(axis=0).max()} > 1")
    elif kind == "saturating":
        mat = np.asarray(m["matrix"], dtype=float)
        norm = np.linalg.norm(mat, 2)
        if norm > 1 + TOL:
            problems.append(f"spectral norm {norm} > 1")
        if not m["threshold"] > 0:
            problems.append(f"threshold {m['threshold']} <= 0")
    elif kind != "identity_routing":
        problems.append(f"unknown kind {kind}")
    return problems


def main(path):
    with open(path) as f:
        zoo = json.load(f)["models"]
    failed = 0
    for m in zoo:
        problems = check_model(m)
        status = "ok" if not problems else "FAILED: " + "; ".join(problems)
        print(f"{m['name']:<18} {m['kind']:<17} {status}")
        failed += bool(problems)
    print(f"{len(zoo) - failed}/{len(zoo)} models verified")
    return 1 if failed else 0


if __name__ == "__main__":
    if len(sys.argv) != 2:
        sys.exit("usage: verify_model_matrices.py MODEL_ZOO_JSON")
    sys.exit(main(sys.argv[1]))
