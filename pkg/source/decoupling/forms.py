from django import forms
from django.core.exceptions import ValidationError


class ModelDescriptionForm(forms.Form):
    KIND_CHOICES = [
        ('explicit_tree', 'Explicit tree'),
        ('product', 'Independent steps'),
        ('gallery', 'Gallery model'),
    ]
    kind = forms.ChoiceField(choices=KIND_CHOICES, label='Kind')
    n = forms.IntegerField(min_value=1, required=False, label='Steps')
    root = forms.JSONField(required=False, label='Root node')
    steps = forms.JSONField(required=False, label='Step laws')
    step = forms.JSONField(required=False, label='Repeated step law')
    name = forms.CharField(max_length=40, required=False, label='Gallery name')
    params = forms.JSONField(required=False, label='Gallery parameters')

    def clean(self):
        super().clean()
        data = self.cleaned_data
        kind = data.get('kind')
        if kind == 'explicit_tree':
            if not isinstance(data.get('root'), dict) or data.get('n') is None:
                raise ValidationError(
                    'An explicit tree needs both n and a root node',
                    code='explicit_tree_incomplete'
                )
        if kind == 'product':
            steps, step = data.get('steps'), data.get('step')
            if steps is None and (step is None or data.get('n') is None):
                raise ValidationError(
                    'A product model needs steps, or one step law together with n',
                    code='product_incomplete'
                )
            if steps is not None:
                if not isinstance(steps, list) or not steps:
                    raise ValidationError('steps must be a non-empty list of laws', code='product_incomplete')
                if data.get('n') is not None and data['n'] != len(steps):
                    raise ValidationError(
                        'n does not match the number of step laws',
                        code='depth_mismatch'
                    )
        if kind == 'gallery':
            if not data.get('name'):
                raise ValidationError('A gallery model needs a name', code='gallery_incomplete')
            if data.get('params') is not None and not isinstance(data['params'], dict):
                raise ValidationError('Gallery parameters must be an object', code='gallery_incomplete')
        return data


class StoppedSumSpecForm(forms.Form):
    increments = forms.JSONField(required=False, label='Increment law')
    mu = forms.FloatField(required=False, label='Increment mean')
    sigma2 = forms.FloatField(min_value=0, required=False, label='Increment variance')
    tail = forms.JSONField(required=False, label='P(tau >= j)')
    horizon = forms.IntegerField(min_value=1, required=False, label='Horizon')
    rule = forms.JSONField(required=False, label='Stopping rule')

    def clean(self):
        super().clean()
        data = self.cleaned_data
        if data.get('increments') is None and (data.get('mu') is None or data.get('sigma2') is None):
            raise ValidationError(
                'Give the increment law, or both mu and sigma2',
                code='increments_incomplete'
            )
        tail = data.get('tail')
        if tail is not None:
            if not isinstance(tail, list) or not tail or not all(
                    isinstance(q, (int, float)) and not isinstance(q, bool) for q in tail):
                raise ValidationError('tail must be a non-empty list of numbers', code='non_monotone_tail')
            if data.get('horizon') is None:
                data['horizon'] = len(tail)
        elif data.get('rule') is None or data.get('horizon') is None:
            raise ValidationError(
                'Without a tail vector, give a stopping rule and a horizon',
                code='missing_tail'
            )
        rule = data.get('rule')
        if rule is not None and not (isinstance(rule, dict) and rule.get('name')):
            raise ValidationError('A stopping rule is an object with a name', code='unknown_rule')
        return data


class EstimatorConfigForm(forms.Form):
    n_samples = forms.IntegerField(min_value=100, label='Samples')
    seed = forms.IntegerField(min_value=0, required=False, label='Seed')
    n_streams = forms.IntegerField(min_value=1, required=False, label='Streams')
    batch = forms.IntegerField(min_value=1, required=False, label='Batch')
    workers = forms.IntegerField(min_value=1, required=False, label='Workers')


class RandomModelsForm(forms.Form):
    count = forms.IntegerField(min_value=1, label='Models')
    n = forms.IntegerField(min_value=1, max_value=6, label='Steps')
    branching = forms.IntegerField(min_value=1, max_value=4, label='Branching')
    seed = forms.IntegerField(min_value=0, label='First seed')
    low = forms.FloatField(label='Lowest value')
    high = forms.FloatField(label='Highest value')
    nonnegative = forms.BooleanField(required=False, label='Nonnegative values')

    def clean(self):
        super().clean()
        data = self.cleaned_data
        low, high = data.get('low'), data.get('high')
        if low is not None and high is not None:
            if data.get('nonnegative'):
                low = max(low, 0.0)
            if high <= low:
                raise ValidationError('The value range is empty', code='empty_range')
        return data


class BoundsForm(forms.Form):
    mean = forms.FloatField(required=False, label='E S')
    var_decoupled = forms.FloatField(min_value=0, required=False, label="Var S'")
    m2_decoupled = forms.FloatField(required=False, label="E S'^2")
    t = forms.FloatField(required=False, label='t')
    theta = forms.FloatField(required=False, label='theta')

    def clean(self):
        super().clean()
        data = self.cleaned_data
        chebyshev = data.get('var_decoupled') is not None or data.get('t') is not None
        paley_zygmund = any(data.get(key) is not None for key in ('mean', 'm2_decoupled', 'theta'))
        if not chebyshev and not paley_zygmund:
            raise ValidationError(
                'Give --var-decoupled and --t, or --mean, --m2-decoupled and --theta',
                code='bounds_empty'
            )
        if chebyshev:
            if data.get('var_decoupled') is None or data.get('t') is None:
                raise ValidationError('The Chebyshev bound needs --var-decoupled and --t', code='chebyshev_incomplete')
            if data['t'] <= 0:
                raise ValidationError('t must be positive', code='nonpositive_t')
        if paley_zygmund:
            if any(data.get(key) is None for key in ('mean', 'm2_decoupled', 'theta')):
                raise ValidationError(
                    'The Paley-Zygmund bound needs --mean, --m2-decoupled and --theta',
                    code='paley_zygmund_incomplete'
                )
            if not 0 < data['theta'] < 1:
                raise ValidationError('theta must lie strictly between 0 and 1', code='theta_out_of_range')
        return data
