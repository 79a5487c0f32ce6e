/**
 * Pure HTML rendering: a transcript in, a string out. Replaying one
 * recorded stream always yields the identical markup, so the UI can be
 * snapshot-tested without a browser.
 */

import { renderComparison } from "./diff.js";
import { simplifyEligible } from "./simplify.js";
import type { Turn, TutorItem, UiSession } from "./transcript.js";

export function escapeHtml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

/** Editor pane: one div per line; the diagnosed line gets an underline. */
export function renderEditor(buffer: string, underline: number | null): string {
  const lines = buffer.split("\n");
  if (lines[lines.length - 1] === "") lines.pop();
  const rows = lines.map((line, index) => {
    const lineNo = index + 1;
    const marked = underline === lineNo ? " underlined" : "";
    return (
      `<div class="ed-line${marked}" data-line="${lineNo}">` +
      `<span class="ed-no">${lineNo}</span>` +
      `<code>${escapeHtml(line)}</code></div>`
    );
  });
  return `<div class="editor">${rows.join("")}</div>`;
}

const ITEM_LABEL: Record<string, string> = {
  diagnosis: "Diagnosis",
  concept: "Guidance",
  question: "Question",
  notice: "Notice",
};

function renderItem(item: TutorItem, turn: Turn): string {
  if (item.type === "static_findings") {
    const rows = (item.findings ?? [])
      .map((f) => `<li data-line="${f.line}">${escapeHtml(f.text)}</li>`)
      .join("");
    return `<div class="bubble tutor findings"><ul>${rows}</ul></div>`;
  }
  if (item.type === "example") {
    const comparison = renderComparison(turn.source, item.code ?? null);
    const rows = comparison.rows
      .map((row) => {
        const klass = row.changed ? "diff-row changed" : "diff-row";
        const left = row.left === null ? "" : escapeHtml(row.left);
        const right = row.right === null ? "" : escapeHtml(row.right);
        return `<div class="${klass}"><code>${left}</code><code>${right}</code></div>`;
      })
      .join("");
    return (
      `<div class="bubble tutor example">` +
      `<pre><code>${escapeHtml(item.code ?? "")}</code></pre>` +
      `<div class="comparison">${rows}</div></div>`
    );
  }
  if (item.type === "notice" && item.rules?.length) {
    const rows = item.rules
      .map(
        (rule) =>
          `<li>line ${rule.line}: ${escapeHtml(rule.rule_id)} — ` +
          `${escapeHtml(rule.rationale)}</li>`,
      )
      .join("");
    return (
      `<div class="bubble tutor notice">${escapeHtml(item.text ?? "")}` +
      `<ul class="blocked-rules">${rows}</ul></div>`
    );
  }
  const label = ITEM_LABEL[item.type] ?? item.type;
  return (
    `<div class="bubble tutor ${item.type}">` +
    `<span class="label">${label}</span> ${escapeHtml(item.text ?? "")}</div>`
  );
}

function renderConsole(turn: Turn): string {
  const pane = turn.consolePane;
  if (pane.status === null) return "";
  // verbatim program output; students debug against what really happened
  return (
    `<div class="console" data-status="${escapeHtml(pane.status)}">` +
    `<pre class="stdout">${escapeHtml(pane.stdout)}</pre>` +
    `<pre class="stderr">${escapeHtml(pane.stderr)}</pre></div>`
  );
}

export function renderTurn(turn: Turn): string {
  const student =
    `<div class="bubble student"><pre><code>${escapeHtml(turn.source)}</code></pre>` +
    (turn.query ? `<p>${escapeHtml(turn.query)}</p>` : "") +
    `</div>`;
  const items = turn.items.map((item) => renderItem(item, turn)).join("");
  const state =
    turn.state === "disconnected"
      ? `<div class="turn-state incomplete">Connection lost — ` +
        `<button data-retry="${escapeHtml(turn.key)}">retry</button></div>`
      : turn.state === "failed"
        ? `<div class="turn-state failed">${escapeHtml(turn.errorMessage ?? "")}</div>`
        : "";
  const simplify = simplifyEligible(turn)
    ? `<button class="simplify" data-simplify="${escapeHtml(turn.key)}">Simplify</button>`
    : "";
  return (
    `<section class="turn" data-key="${escapeHtml(turn.key)}" data-state="${turn.state}">` +
    student +
    renderConsole(turn) +
    items +
    state +
    simplify +
    `</section>`
  );
}

export function renderTranscript(session: UiSession): string {
  const turns = session.turns.map(renderTurn).join("");
  return `<div class="transcript">${turns}</div>`;
}

/** Everything the page shows for one session state. */
export function renderApp(session: UiSession): string {
  const lastTurn = session.turns[session.turns.length - 1];
  const underline = lastTurn ? lastTurn.diagnosedLine : null;
  return renderEditor(session.editorBuffer, underline) + renderTranscript(session);
}
