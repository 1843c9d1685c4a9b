"""Component and compute accounting for the five architectures.

``param_census`` reports what an instance actually stores and executes, by
enumerating its arrays — never by closed-form formula.  ``REFERENCE_COMPONENTS``
holds the published comparison counts these cells are checked against; where
this implementation's enumeration disagrees with a reference count, the
census table says so explicitly rather than reconciling silently.
"""

from __future__ import annotations

from .base import CellParams, architectures, get_cell

# Published reference accounting per architecture:
# (gates, activations, has memory cell, has peephole, weight matrices,
#  elementwise multiplications, bias vectors)
REFERENCE_COMPONENTS: dict[str, dict] = {
    "rnn": dict(gates=0, activations=1, memory_cell=False, peephole=False,
                weight_matrices=2, elementwise_mults=2, bias_vectors=1),
    "gru": dict(gates=2, activations=1, memory_cell=False, peephole=False,
                weight_matrices=6, elementwise_mults=3, bias_vectors=3),
    "lstm": dict(gates=3, activations=2, memory_cell=True, peephole=False,
                 weight_matrices=8, elementwise_mults=3, bias_vectors=4),
    "plstm": dict(gates=3, activations=2, memory_cell=True, peephole=True,
                  weight_matrices=11, elementwise_mults=6, bias_vectors=4),
    "litelstm": dict(gates=1, activations=2, memory_cell=True, peephole=True,
                     weight_matrices=6, elementwise_mults=3, bias_vectors=2),
}


def param_census(params: CellParams) -> dict:
    """Counts for one parameter set, enumerated from its stored arrays.

    ``mults_per_step`` is the multiply-accumulate cost of one forward step:
    every stored matrix is applied once per step (rows*cols MACs each), plus
    n lanes for each elementwise product the step actually performs.
    """
    cell = get_cell(params.arch)
    arrays = list(params.arrays.values())
    matrix_macs = sum(a.shape[0] * a.shape[1] for a in arrays if a.ndim == 2)
    return {
        "gates": cell.gates,
        "activations": cell.activations,
        "matrices": sum(1 for a in arrays if a.ndim == 2),
        "biases": sum(1 for a in arrays if a.ndim == 1),
        "scalars": sum(a.size for a in arrays),
        "mults_per_step": matrix_macs + params.n * cell.elementwise_mults,
    }


def census_table(n: int, m: int, rng=None) -> str:
    """Text table of enumerated and reference component counts at (n, m)."""
    import numpy as np

    from .base import init_params

    if rng is None:
        rng = np.random.default_rng(0)
    archs = architectures()
    rows: list[tuple[str, list[str]]] = []
    censuses = {}
    for arch in archs:
        censuses[arch] = param_census(init_params(get_cell(arch), n, m, rng))

    def row(label, values):
        rows.append((label, [str(v) for v in values]))

    ref = REFERENCE_COMPONENTS
    row("gates", [censuses[a]["gates"] for a in archs])
    row("activations", [censuses[a]["activations"] for a in archs])
    row("memory cell", ["yes" if get_cell(a).has_cell_state else "no" for a in archs])
    row("peephole", ["yes" if ref[a]["peephole"] else "no" for a in archs])
    row("weight matrices (enumerated)", [censuses[a]["matrices"] for a in archs])
    row("weight matrices (reference)", [ref[a]["weight_matrices"] for a in archs])
    row("bias vectors", [censuses[a]["biases"] for a in archs])
    row("elementwise mults (reference)", [ref[a]["elementwise_mults"] for a in archs])
    row("elementwise mults (this impl)", [get_cell(a).elementwise_mults for a in archs])
    row("trainable scalars", [censuses[a]["scalars"] for a in archs])
    row("MACs per step", [censuses[a]["mults_per_step"] for a in archs])

    label_w = max(len(r[0]) for r in rows)
    col_w = max(max(len(v) for v in r[1]) for r in rows)
    col_w = max(col_w, max(len(a) for a in archs))
    lines = [f"Component census at n={n}, m={m}"]
    header = " " * label_w + "  " + "  ".join(a.rjust(col_w) for a in archs)
    lines.append(header)
    lines.append("-" * len(header))
    for label, values in rows:
        lines.append(label.ljust(label_w) + "  " + "  ".join(v.rjust(col_w) for v in values))
    notes = []
    for arch in archs:
        enum_m = censuses[arch]["matrices"]
        ref_m = ref[arch]["weight_matrices"]
        if enum_m != ref_m:
            notes.append(
                f"note: {arch} stores {enum_m} weight matrices; the reference count"
                f" is {ref_m}. The enumerated value is what this implementation"
                f" trains and serializes."
            )
        if get_cell(arch).elementwise_mults != ref[arch]["elementwise_mults"]:
            notes.append(
                f"note: {arch} performs {get_cell(arch).elementwise_mults} elementwise"
                f" products per step in this implementation; the reference accounting"
                f" lists {ref[arch]['elementwise_mults']}."
            )
    lines.extend(notes)
    return "\n".join(lines)
