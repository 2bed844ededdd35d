"""Graphviz DOT export of a composed chain's digraph.

Recurrent classes become clusters; states whose automaton component must
recur are filled green, states that must be avoided are filled red.
"""

from .chain import GlobalMarkovChain, RecurrenceAnalysis


def _node_label(chain, m):
    p, gd, ga = chain.decode(m)
    return f"m{m} ({p},{gd},{ga})"


def export_dot(chain: GlobalMarkovChain, analysis: RecurrenceAnalysis) -> str:
    k_states = set().union(*(K for _, K in chain.pairs)) if chain.pairs else set()
    l_states = set().union(*(L for L, _ in chain.pairs)) if chain.pairs else set()

    def style(m):
        p = chain.proj_product(m)
        if p in k_states:
            return ' style=filled fillcolor="green"'
        if p in l_states:
            return ' style=filled fillcolor="red"'
        return ""

    lines = ["digraph gmc {", "  rankdir=LR;"]
    clustered = set()
    for k, cls in enumerate(analysis.classes):
        lines.append(f"  subgraph cluster_{k} {{")
        lines.append(f'    label="recurrent class {k}";')
        for m in cls:
            lines.append(f'    n{m} [label="{_node_label(chain, m)}"{style(m)}];')
            clustered.add(m)
        lines.append("  }")
    for m in range(chain.n_states):
        if m not in clustered:
            shape = " shape=doubleoctagon" if m == chain.m0 else ""
            lines.append(f'  n{m} [label="{_node_label(chain, m)}"{style(m)}{shape}];')
    for m in range(chain.n_states):
        for m2 in (chain.trans[m] > 0).nonzero()[0]:
            lines.append(f'  n{m} -> n{m2} [label="{chain.trans[m, m2]:.3g}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
