// Form fields are generated from GET /v1/schema/{kind}. Adding an attribute
// to the registry and restarting the service makes its field appear here
// with zero code changes.

import type {
  AttributeDomain,
  AttributeValue,
  SchemaAttribute,
  SchemaResponse,
} from './types'

export type FieldControl = 'checkbox' | 'grade' | 'select' | 'multiselect'

export interface FormField {
  id: string
  label: string
  category: string
  articles: string[]
  dispositive: boolean
  control: FieldControl
  options: string[]
  min?: number
  max?: number
}

const CONTROLS: Record<AttributeDomain['type'], FieldControl> = {
  flag: 'checkbox',
  level: 'grade',
  choice: 'select',
  tagset: 'multiselect',
}

export function buildFormFields(schema: SchemaResponse): FormField[] {
  return schema.attributes.map((attr: SchemaAttribute) => ({
    id: attr.id,
    label: attr.id.split('.').pop()!.replace(/_/g, ' '),
    category: attr.category,
    articles: attr.articles,
    dispositive: attr.dispositive,
    control: CONTROLS[attr.domain.type],
    options: attr.domain.vocabulary ?? [],
    min: attr.domain.min,
    max: attr.domain.max,
  }))
}

/** Client-side domain check: invalid values never reach the service. */
export function valueConforms(domain: AttributeDomain, value: AttributeValue): boolean {
  if (value === null) return true // unanswered
  switch (domain.type) {
    case 'flag':
      return typeof value === 'boolean'
    case 'level':
      return (
        typeof value === 'number' &&
        Number.isInteger(value) &&
        value >= (domain.min ?? 0) &&
        value <= (domain.max ?? 4)
      )
    case 'choice':
      return typeof value === 'string' && (domain.vocabulary ?? []).includes(value)
    case 'tagset':
      return (
        Array.isArray(value) &&
        value.every((t) => (domain.vocabulary ?? []).includes(t))
      )
  }
}
