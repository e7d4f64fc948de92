/**
 * Minimal RFC-4180 CSV reader, enough for the sweep files the Python CLI
 * writes (comma separator, optional double-quoted fields, \n or \r\n).
 */

export interface CsvTable {
  header: string[];
  rows: Record<string, string>[];
}

export function parseCsv(text: string): CsvTable {
  const records = splitRecords(text);
  if (records.length === 0) {
    throw new Error("empty CSV: no header row");
  }
  const header = records[0];
  const rows = records.slice(1).map((fields, i) => {
    if (fields.length !== header.length) {
      throw new Error(
        `CSV row ${i + 2} has ${fields.length} fields, expected ${header.length}`,
      );
    }
    const row: Record<string, string> = {};
    header.forEach((name, j) => {
      row[name] = fields[j];
    });
    return row;
  });
  return { header, rows };
}

function splitRecords(text: string): string[][] {
  const records: string[][] = [];
  let fields: string[] = [];
  let field = "";
  let inQuotes = false;
  let sawAny = false;

  const pushField = () => {
    fields.push(field);
    field = "";
  };
  const pushRecord = () => {
    pushField();
    records.push(fields);
    fields = [];
  };

  for (let i = 0; i < text.length; i++) {
    const ch = text[i];
    sawAny = true;
    if (inQuotes) {
      if (ch === '"') {
        if (text[i + 1] === '"') {
          field += '"';
          i++;
        } else {
          inQuotes = false;
        }
      } else {
        field += ch;
      }
    } else if (ch === '"') {
      inQuotes = true;
    } else if (ch === ",") {
      pushField();
    } else if (ch === "\n") {
      pushRecord();
    } else if (ch === "\r") {
      if (text[i + 1] === "\n") i++;
      pushRecord();
    } else {
      field += ch;
    }
  }
  if (inQuotes) {
    throw new Error("unterminated quoted field in CSV");
  }
  if (field.length > 0 || fields.length > 0) {
    pushRecord();
  }
  if (!sawAny) {
    throw new Error("empty CSV: no header row");
  }
  return records;
}

/** Columns that must exist; throws naming every missing one. */
export function requireColumns(table: CsvTable, needed: readonly string[], context: string): void {
  const missing = needed.filter((c) => !table.header.includes(c));
  if (missing.length > 0) {
    throw new Error(
      `${context}: CSV is missing required columns [${missing.join(", ")}]; ` +
        `expected at least [${needed.join(", ")}], found [${table.header.join(", ")}]`,
    );
  }
}
