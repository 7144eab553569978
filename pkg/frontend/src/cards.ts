// Parsing pasted/uploaded card documents and exporting canonical card files.
// Mirrors the engine's front-matter convention: a document whose first line
// is a `---` fence keeps its card in the fenced block, either directly or
// under the `compliance_card` key when embedded in a hub card header.

import YAML from 'yaml'

import type { AttributeValue, Card, CardKind } from './types'

const KINDS: CardKind[] = ['project', 'data', 'model']

export interface FrontMatterResult {
  metadata: string
  body: string
  unterminated: boolean
}

export function extractFrontMatter(text: string): FrontMatterResult {
  const firstLine = text.split('\n', 1)[0].trimEnd()
  if (firstLine !== '---') {
    return { metadata: '', body: text, unterminated: false }
  }
  const rest = text.includes('\n') ? text.slice(text.indexOf('\n') + 1) : ''
  const lines = rest.split('\n')
  for (let i = 0; i < lines.length; i++) {
    if (lines[i].trimEnd() === '---') {
      return {
        metadata: lines.slice(0, i).join('\n'),
        body: lines.slice(i + 1).join('\n'),
        unterminated: false,
      }
    }
  }
  return { metadata: '', body: text, unterminated: true }
}

export class CardParseError extends Error {}

/** Parse a pasted document (YAML card, JSON card, or front-matter Markdown). */
export function parseCardText(text: string): Card {
  let source = text
  const fm = extractFrontMatter(text)
  if (fm.unterminated) {
    throw new CardParseError('front-matter fence opened but never closed')
  }
  if (fm.metadata) {
    source = fm.metadata
  }
  let doc: unknown
  try {
    doc = YAML.parse(source)
  } catch (err) {
    throw new CardParseError(`not a valid card document: ${String(err)}`)
  }
  if (doc === null || typeof doc !== 'object' || Array.isArray(doc)) {
    throw new CardParseError('card document must be a mapping')
  }
  let record = doc as Record<string, unknown>
  const embedded = record['compliance_card']
  if (embedded && typeof embedded === 'object' && !Array.isArray(embedded)) {
    record = embedded as Record<string, unknown>
  }
  const kind = record['kind']
  if (typeof kind !== 'string' || !KINDS.includes(kind as CardKind)) {
    throw new CardParseError(`kind must be one of ${KINDS.join('/')}`)
  }
  const cardId = record['card_id']
  if (typeof cardId !== 'string' || !cardId) {
    throw new CardParseError('card_id (nonempty string) is required')
  }
  const schemaVersion = record['schema_version']
  if (schemaVersion === undefined || schemaVersion === null) {
    throw new CardParseError('schema_version is required')
  }
  const valuesRaw = record['values'] ?? {}
  if (typeof valuesRaw !== 'object' || Array.isArray(valuesRaw)) {
    throw new CardParseError('values must be a mapping')
  }
  return {
    kind: kind as CardKind,
    card_id: cardId,
    subject_name:
      typeof record['subject_name'] === 'string'
        ? (record['subject_name'] as string)
        : '',
    schema_version: String(schemaVersion),
    values: { ...(valuesRaw as Record<string, AttributeValue>) },
  }
}

/** Canonical card-file form: sorted keys, unanswered omitted, sorted tag lists. */
export function toCanonicalYaml(card: Card): string {
  const values: Record<string, AttributeValue> = {}
  for (const key of Object.keys(card.values).sort()) {
    const value = card.values[key]
    if (value === null || value === undefined) continue
    values[key] = Array.isArray(value) ? [...value].sort() : value
  }
  const doc: Record<string, unknown> = {
    card_id: card.card_id,
    kind: card.kind,
    schema_version: card.schema_version,
    values,
  }
  if (card.subject_name) {
    doc['subject_name'] = card.subject_name
  }
  return YAML.stringify(doc, { sortMapEntries: true })
}
