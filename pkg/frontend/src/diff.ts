export type DiffStatus = 'equal' | 'removed' | 'added';

export interface DiffSegment {
  status: DiffStatus;
  tokens: string[];
}

function tokenize(text: string): string[] {
  return text.split(/\s+/).filter((token) => token.length > 0);
}

/**
 * Token-level diff between two transcripts, based on a longest common
 * subsequence. Adjacent tokens with the same status are grouped into one
 * segment, and removals are emitted before the additions that replace them.
 */
export function diffTranscripts(before: string, after: string): DiffSegment[] {
  const a = tokenize(before);
  const b = tokenize(after);

  // lcs[i][j] = LCS length of a[i..] and b[j..]
  const lcs: number[][] = Array.from({ length: a.length + 1 }, () =>
    new Array<number>(b.length + 1).fill(0),
  );
  for (let i = a.length - 1; i >= 0; i--) {
    for (let j = b.length - 1; j >= 0; j--) {
      lcs[i][j] =
        a[i] === b[j] ? lcs[i + 1][j + 1] + 1 : Math.max(lcs[i + 1][j], lcs[i][j + 1]);
    }
  }

  const segments: DiffSegment[] = [];
  const push = (status: DiffStatus, token: string) => {
    const last = segments[segments.length - 1];
    if (last !== undefined && last.status === status) {
      last.tokens.push(token);
    } else {
      segments.push({ status, tokens: [token] });
    }
  };

  let i = 0;
  let j = 0;
  while (i < a.length && j < b.length) {
    if (a[i] === b[j]) {
      push('equal', a[i]);
      i++;
      j++;
    } else if (lcs[i + 1][j] >= lcs[i][j + 1]) {
      push('removed', a[i]);
      i++;
    } else {
      push('added', b[j]);
      j++;
    }
  }
  for (; i < a.length; i++) push('removed', a[i]);
  for (; j < b.length; j++) push('added', b[j]);
  return segments;
}

/** Count of tokens that differ between the two transcripts. */
export function changedTokenCount(segments: DiffSegment[]): number {
  return segments
    .filter((segment) => segment.status !== 'equal')
    .reduce((total, segment) => total + segment.tokens.length, 0);
}
