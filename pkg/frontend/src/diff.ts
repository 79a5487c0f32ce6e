/**
 * Line-level diff for the side-by-side comparison view (student code on
 * the left, suggested example on the right). Classic LCS alignment so
 * unchanged lines sit on the same row and only real differences get
 * highlighted.
 */

export interface DiffRow {
  left: string | null;
  right: string | null;
  changed: boolean;
}

export interface ComparisonView {
  visible: boolean;
  rows: DiffRow[];
}

export function diffLines(before: string, after: string): DiffRow[] {
  const a = before.split("\n");
  const b = after.split("\n");
  // trailing newline produces a phantom empty line on both sides
  if (a[a.length - 1] === "") a.pop();
  if (b[b.length - 1] === "") b.pop();

  const n = a.length;
  const m = b.length;
  const lcs: number[][] = Array.from({ length: n + 1 }, () =>
    new Array<number>(m + 1).fill(0),
  );
  for (let i = n - 1; i >= 0; i--) {
    for (let j = m - 1; j >= 0; j--) {
      lcs[i][j] =
        a[i] === b[j]
          ? lcs[i + 1][j + 1] + 1
          : Math.max(lcs[i + 1][j], lcs[i][j + 1]);
    }
  }

  const rows: DiffRow[] = [];
  let i = 0;
  let j = 0;
  while (i < n && j < m) {
    if (a[i] === b[j]) {
      rows.push({ left: a[i], right: b[j], changed: false });
      i++;
      j++;
    } else if (lcs[i + 1][j] >= lcs[i][j + 1]) {
      rows.push({ left: a[i], right: null, changed: true });
      i++;
    } else {
      rows.push({ left: null, right: b[j], changed: true });
      j++;
    }
  }
  for (; i < n; i++) rows.push({ left: a[i], right: null, changed: true });
  for (; j < m; j++) rows.push({ left: null, right: b[j], changed: true });
  return rows;
}

/** Hidden whenever either pane is missing (e.g. Socratic mode has no example). */
export function renderComparison(
  before: string | null,
  after: string | null,
): ComparisonView {
  if (before === null || after === null) {
    return { visible: false, rows: [] };
  }
  return { visible: true, rows: diffLines(before, after) };
}
