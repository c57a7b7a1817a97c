// Pure highlight logic for the per-step decision tree.
//
// The tree is fixed: AT --N--> leaf0, AT --H--> TAI --N--> leaf1,
// TAI --H--> G --N--> leaf2, G --H--> leaf3. Given the answers recorded
// so far the function says which nodes and edges were visited, which
// leaf (if any) was reached, and whether the whole step is dimmed.
// Same input, same output; no DOM, no fetch, no clock.

import type { AnswerValue } from "./types.js";

export type NodeId = "AT" | "TAI" | "G" | "leaf0" | "leaf1" | "leaf2" | "leaf3";
export type EdgeId =
  | "AT-N"
  | "AT-H"
  | "TAI-N"
  | "TAI-H"
  | "G-N"
  | "G-H";

export interface TreeHighlight {
  visitedNodes: NodeId[];
  visitedEdges: EdgeId[];
  reachedLeaf: NodeId | null;
  dimmed: boolean;
}

const CRITERIA: ("AT" | "TAI" | "G")[] = ["AT", "TAI", "G"];
const LEAF_ON_N: Record<string, NodeId> = {
  AT: "leaf0",
  TAI: "leaf1",
  G: "leaf2",
};

export function highlight(
  answers: AnswerValue[],
  skipped: boolean
): TreeHighlight {
  if (skipped) {
    // a skipped step renders fully greyed out, discarding any partial path
    return { visitedNodes: [], visitedEdges: [], reachedLeaf: null, dimmed: true };
  }
  const visitedNodes: NodeId[] = [];
  const visitedEdges: EdgeId[] = [];
  let reachedLeaf: NodeId | null = null;
  for (let i = 0; i < answers.length; i++) {
    const criterion = CRITERIA[i];
    const value = answers[i];
    visitedNodes.push(criterion);
    visitedEdges.push(`${criterion}-${value}` as EdgeId);
    if (value === "N") {
      reachedLeaf = LEAF_ON_N[criterion];
      break;
    }
    if (criterion === "G") {
      reachedLeaf = "leaf3";
    }
  }
  if (reachedLeaf !== null) {
    visitedNodes.push(reachedLeaf);
  }
  return { visitedNodes, visitedEdges, reachedLeaf, dimmed: false };
}

const ALL_NODES: NodeId[] = ["AT", "TAI", "G", "leaf0", "leaf1", "leaf2", "leaf3"];
const ALL_EDGES: EdgeId[] = ["AT-N", "AT-H", "TAI-N", "TAI-H", "G-N", "G-H"];

const NODE_LABELS: Record<NodeId, string> = {
  AT: "AT",
  TAI: "TAI",
  G: "G",
  leaf0: "0",
  leaf1: "1",
  leaf2: "2",
  leaf3: "3",
};

/** Static HTML for the step tree with highlight classes applied. */
export function renderTree(state: TreeHighlight): string {
  const rows: string[] = [];
  for (const node of ALL_NODES) {
    const classes = ["node"];
    if (state.dimmed || !state.visitedNodes.includes(node)) classes.push("dim");
    if (state.reachedLeaf === node) classes.push("reached");
    rows.push(
      `<span class="${classes.join(" ")}" data-node="${node}">` +
        `${NODE_LABELS[node]}</span>`
    );
  }
  for (const edge of ALL_EDGES) {
    const classes = ["edge"];
    if (state.dimmed || !state.visitedEdges.includes(edge)) classes.push("dim");
    rows.push(`<span class="${classes.join(" ")}" data-edge="${edge}"></span>`);
  }
  return `<div class="tree">${rows.join("")}</div>`;
}
