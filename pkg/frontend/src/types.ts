// Wire types for the /v1 JSON API. The engine is the single source of
// truth; nothing here re-implements rule logic.

export type CardKind = 'project' | 'data' | 'model'

export type AttributeValue = boolean | number | string | string[] | null

export interface Card {
  kind: CardKind
  card_id: string
  subject_name?: string
  schema_version: string
  values: Record<string, AttributeValue>
}

export interface Issue {
  severity: 'error' | 'warning'
  path: string
  message: string
  code: string
}

export interface ValidateResponse {
  valid: boolean
  issues: Issue[]
}

export type Verdict =
  | 'compliant'
  | 'non_compliant'
  | 'indeterminate'
  | 'prohibited'
  | 'out_of_scope'

export type CheckStatus = 'pass' | 'fail' | 'indeterminate' | 'not_applicable'

export interface EvidenceEntry {
  card_id: string
  attribute_id: string
  observed: AttributeValue
  state: 'satisfied' | 'unsatisfied' | 'unknown'
}

export interface RequirementResult {
  requirement_id: string
  status: CheckStatus
  evidence: EvidenceEntry[]
}

export interface Report {
  report_schema_version: string
  ruleset_version: string
  registry_version: string
  strict: boolean
  classification: string[]
  assumptions: { attribute_id: string; assumed: string }[]
  results: RequirementResult[]
  verdict: Verdict
  elapsed_ms: number
  disclaimer: string
}

export interface WhatIfResponse {
  baseline: Report
  mutated: Report
  delta: string[]
}

export interface AttributeDomain {
  type: 'flag' | 'level' | 'choice' | 'tagset'
  vocabulary?: string[]
  min?: number
  max?: number
}

export interface SchemaAttribute {
  id: string
  category: string
  domain: AttributeDomain
  dispositive: boolean
  articles: string[]
  kinds: CardKind[]
}

export interface SchemaResponse {
  kind: CardKind
  registry_version: string
  attributes: SchemaAttribute[]
}

export interface RuleSummary {
  id: string
  title: string
  articles: string[]
  enabled: boolean
}

export interface RulesResponse {
  rules_version: string
  requirements: RuleSummary[]
}

export interface Mutation {
  card_id: string
  attribute_id: string
  value: AttributeValue
}

export interface AnalyzeBody {
  project: Card
  data: Card[]
  models: Card[]
  options?: { strict?: boolean }
}
