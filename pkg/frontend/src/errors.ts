/** Input CSV does not match the expected figure schema (wrong columns,
 * unparsable cells, or no data rows). */
export class SchemaMismatchError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "SchemaMismatchError";
  }
}

/** Input CSV file does not exist. */
export class MissingFileError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "MissingFileError";
  }
}
