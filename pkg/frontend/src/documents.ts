/**
 * Document model mirrored from the retrieval engine's external JSONL schemas,
 * plus the same linearization rule (" | " between segments, " , " between
 * cells, empty segments skipped, "|" in cells replaced by "/").
 */

export interface Passage {
  kind: "text";
  id: string;
  title: string;
  text: string;
}

export interface Table {
  kind: "table";
  id: string;
  pageTitle: string;
  sectionTitle: string;
  caption: string;
  header: string[];
  rows: string[][];
}

export type Doc = Passage | Table;

const esc = (s: string) => s.replace(/\|/g, "/");

export function linearize(doc: Doc): string {
  const segments: string[] =
    doc.kind === "text"
      ? [doc.title, doc.text]
      : [
          doc.pageTitle,
          doc.sectionTitle,
          doc.caption,
          doc.header.map(esc).join(" , "),
          ...doc.rows.map((r) => r.map(esc).join(" , ")),
        ];
  return segments
    .map(esc)
    .filter((s) => s.length > 0)
    .join(" | ");
}

/** Token with 1-based table coordinates; 0 means "not a table cell". */
export interface PositionedToken {
  token: string;
  rowId: number;
  colId: number;
}

const TOKEN_RE = /[\p{L}\p{N}]+/gu;

export function tokenize(text: string): string[] {
  return (text.toLowerCase().match(TOKEN_RE) ?? []) as string[];
}

/**
 * Tokenize a document, attaching row/column ids for table cells so the
 * encoder can add 2-D position features. Header is row 1, data rows follow.
 */
export function tokenizeDoc(doc: Doc): PositionedToken[] {
  const out: PositionedToken[] = [];
  if (doc.kind === "text") {
    for (const token of tokenize(linearize(doc))) out.push({ token, rowId: 0, colId: 0 });
    return out;
  }
  for (const part of [doc.pageTitle, doc.sectionTitle, doc.caption]) {
    for (const token of tokenize(part)) out.push({ token, rowId: 0, colId: 0 });
  }
  const allRows = [doc.header, ...doc.rows];
  allRows.forEach((row, r) => {
    row.forEach((cell, c) => {
      for (const token of tokenize(cell)) out.push({ token, rowId: r + 1, colId: c + 1 });
    });
  });
  return out;
}

export function parseDocLine(line: string): Doc {
  const obj = JSON.parse(line);
  if ("header" in obj) {
    const id = String(obj.id).startsWith("table:") ? String(obj.id) : `table:${obj.id}`;
    return {
      kind: "table",
      id,
      pageTitle: String(obj.page_title ?? ""),
      sectionTitle: String(obj.section_title ?? ""),
      caption: String(obj.caption ?? ""),
      header: (obj.header as string[]).map(String),
      rows: (obj.rows ?? []).map((r: string[]) => r.map(String)),
    };
  }
  const id = String(obj.id).startsWith("text:") ? String(obj.id) : `text:${obj.id}`;
  return { kind: "text", id, title: String(obj.title ?? ""), text: String(obj.text) };
}
