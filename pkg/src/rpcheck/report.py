"""Report emission: deterministic JSON/CSV/text files plus rendered figures.

Figures are written next to the delimited output with a non-interactive
backend; JSON output is byte-stable for a fixed verdict.
"""
from __future__ import annotations

import csv
import json
import os

import numpy as np


def _c(z):
    z = complex(z)
    return [z.real, z.imag]


def ensure_dir(path):
    os.makedirs(path, exist_ok=True)
    return path


def write_json(path, payload):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


# ---------------------------------------------------------------------------
# verdict reports
# ---------------------------------------------------------------------------

def verdict_payload(verdict, model_name):
    payload = {
        "model": model_name,
        "zeta": _c(verdict.zeta),
        "tolerance": verdict.tol,
        "betas": [
            {
                "beta": e.beta,
                "error": e.error,
                "psd_all": e.psd_all,
                "cross_degree_dev": e.cross_degree_dev,
                "blocks": [
                    {"degree": int(k), "min_eig": float(m), "psd": bool(p),
                     "hermiticity_dev": float(h)}
                    for (k, m, p, h) in e.blocks
                ],
            }
            for e in verdict.entries
        ],
        "rp_all_beta": verdict.rp_all_beta,
        "coupling_available": verdict.coupling_available,
        "coupling_psd": verdict.coupling_psd,
        "coupling_min_eig": verdict.coupling_min_eig,
        "coupling_hermiticity_dev": verdict.coupling_herm_dev,
        "agreement": verdict.agreement,
        "status": verdict.status,
    }
    w = verdict.witness
    if w is not None:
        payload["witness"] = {
            "found": w.found,
            "degree": int(w.degree),
            "beta_star": w.beta_star,
            "form_value": w.form_value,
            "j0_min_eig": w.j0_min_eig,
            "beta_grid": list(w.grid),
            "coefficients": [
                {"index": int(i), "value": _c(c)}
                for i, c in zip(w.indices, w.coefficients)
            ],
        }
    else:
        payload["witness"] = None
    return payload


def write_verdict_csv(path, verdict):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["beta", "degree", "min_eig", "psd", "hermiticity_dev"])
        for e in verdict.entries:
            for (k, m, p, h) in e.blocks:
                writer.writerow([e.beta, k, f"{m:.16e}", int(p), f"{h:.3e}"])
    return path


def verdict_text(verdict, model_name):
    lines = [f"model: {model_name}", f"status: {verdict.status}",
             f"zeta: {complex(verdict.zeta):.6g}", f"tolerance: {verdict.tol:g}"]
    for e in verdict.entries:
        if e.error:
            lines.append(f"beta={e.beta:g}: ERROR {e.error}")
            continue
        blk = ", ".join(f"deg {k}: min_eig={m:.3e} {'ok' if p else 'NEG'}"
                        for (k, m, p, _) in e.blocks)
        lines.append(f"beta={e.beta:g}: {'PSD' if e.psd_all else 'not PSD'} ({blk})")
    if verdict.coupling_available:
        lines.append(f"cross-plane couplings: psd={verdict.coupling_psd} "
                     f"min_eig={verdict.coupling_min_eig:.3e} agreement={verdict.agreement}")
    else:
        lines.append("cross-plane couplings: unavailable (non-factorizing background)")
    if verdict.witness is not None and verdict.witness.found:
        w = verdict.witness
        lines.append(f"witness: degree {w.degree}, beta*={w.beta_star:g}, "
                     f"form value {w.form_value:.3e}")
    return "\n".join(lines) + "\n"


def plot_verdict(path, verdict):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    entries = [e for e in verdict.entries if not e.error]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    degrees = sorted({k for e in entries for (k, _, _, _) in e.blocks})
    for k in degrees:
        xs, ys = [], []
        for e in entries:
            for (kk, m, _, _) in e.blocks:
                if kk == k:
                    xs.append(e.beta)
                    ys.append(m)
        ax.plot(xs, ys, "o-", label=f"degree {k}")
    ax.axhline(0.0, color="k", lw=0.8)
    ax.set_xlabel(r"$\beta$")
    ax.set_ylabel("minimum Gram eigenvalue")
    ax.set_title(f"{verdict.status}")
    ax.set_yscale("symlog", linthresh=1e-12)
    if degrees:
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


# ---------------------------------------------------------------------------
# coupling-matrix reports
# ---------------------------------------------------------------------------

def coupling_payload(couplings, model_name):
    basis = couplings.basis
    labels = basis.labels()
    eigs = np.linalg.eigvalsh(0.5 * (couplings.j0() + couplings.j0().conj().T)) \
        if couplings.j0().size else np.zeros(0)
    return {
        "model": model_name,
        "identity_index": int(basis.i0),
        "indices": [
            {"index": i, "label": labels[i], "degree": int(basis.degrees[i]),
             "is_identity": i == basis.i0}
            for i in range(len(basis))
        ],
        "matrix": [[_c(z) for z in row] for row in couplings.matrix],
        "cross_plane_spectrum": [float(v) for v in eigs],
        "hermiticity_dev": couplings.hermitian_dev(),
    }


def write_coupling_csv(path, couplings):
    basis = couplings.basis
    labels = basis.labels()
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["row", "col", "row_label", "col_label",
                         "row_degree", "col_degree", "re", "im", "cross_plane"])
        for i in range(len(basis)):
            for j in range(len(basis)):
                z = couplings.matrix[i, j]
                if z == 0:
                    continue
                writer.writerow([i, j, labels[i], labels[j],
                                 int(basis.degrees[i]), int(basis.degrees[j]),
                                 f"{z.real:.16e}", f"{z.imag:.16e}",
                                 int(i != basis.i0 and j != basis.i0)])
    return path


def plot_coupling_spectrum(path, couplings):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    j0 = couplings.j0()
    eigs = np.linalg.eigvalsh(0.5 * (j0 + j0.conj().T)) if j0.size else np.zeros(0)
    fig, ax = plt.subplots(figsize=(6.0, 3.5))
    ax.plot(np.arange(len(eigs)), eigs, "s", ms=4)
    ax.axhline(0.0, color="k", lw=0.8)
    ax.set_xlabel("index")
    ax.set_ylabel("eigenvalue")
    ax.set_title("cross-plane coupling spectrum")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


# ---------------------------------------------------------------------------
# hilbert-space reports
# ---------------------------------------------------------------------------

def hilbert_payload(spaces, model_name):
    return {
        "model": model_name,
        "betas": [
            {
                "beta": beta,
                "dims": {str(k): int(v) for k, v in os_space.dims.items()},
                "null_dim": int(os_space.null_dim),
                "total_dim": int(os_space.total_dim),
                "plus_dim": int(os_space.plus_dim),
                "sum_rule": bool(os_space.sum_rule_holds()),
            }
            for beta, os_space in spaces
        ],
    }


def plot_hilbert_dims(path, spaces):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6.0, 3.5))
    width = 0.8 / max(1, len(spaces))
    for t, (beta, os_space) in enumerate(spaces):
        ks = sorted(os_space.dims)
        ax.bar([k + t * width for k in ks], [os_space.dims[k] for k in ks],
               width=width, label=f"beta={beta:g}")
    ax.set_xlabel("degree")
    ax.set_ylabel("dimension")
    ax.set_title("quantum Hilbert space dimensions")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
